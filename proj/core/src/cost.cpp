#include "coba/cost.hpp"

#include <algorithm>

namespace coba {

CostEstimate cost_of(const TokenUsage& usage, const Rates& rates) {
  CostEstimate e;
  e.input_tokens = usage.input_tokens;
  e.output_tokens = usage.output_tokens;
  e.usd = (static_cast<double>(usage.input_tokens) * rates.input_per_million +
           static_cast<double>(usage.output_tokens) * rates.output_per_million) /
          1e6;
  return e;
}

CostEstimate estimate_cost(std::int64_t n_examples, std::int64_t avg_chars,
                           const Rates& rates, const CostModel& model) {
  n_examples = std::max<std::int64_t>(n_examples, 0);
  const auto text = static_cast<std::size_t>(std::max<std::int64_t>(avg_chars, 0));
  const auto prompts = default_prompts(model.task);
  auto template_chars = [](const PromptTemplate& t) {
    // Placeholders are replaced by content, so they do not count.
    return t.system.size() + t.user.size();
  };

  // The serialized triple list restates the text, so its size tracks the
  // text length.
  TokenUsage per_example;
  per_example.input_tokens += approx_tokens(template_chars(prompts.ext) + text);
  per_example.output_tokens += approx_tokens(text);

  const double mods = std::max(model.expected_principal_triples, 0.0);
  const auto mod_in = approx_tokens(template_chars(prompts.mod) + model.triple_chars);
  const auto mod_out = approx_tokens(model.triple_chars);

  const auto variants = static_cast<std::int64_t>(std::max(model.n_variants, 0));
  per_example.input_tokens += variants * approx_tokens(template_chars(prompts.rec) + text);
  per_example.output_tokens += variants * approx_tokens(text);

  TokenUsage total;
  total.input_tokens = n_examples * per_example.input_tokens +
                       static_cast<std::int64_t>(static_cast<double>(n_examples) * mods *
                                                 static_cast<double>(mod_in) + 0.5);
  total.output_tokens = n_examples * per_example.output_tokens +
                        static_cast<std::int64_t>(static_cast<double>(n_examples) * mods *
                                                  static_cast<double>(mod_out) + 0.5);
  return cost_of(total, rates);
}

}  // namespace coba
