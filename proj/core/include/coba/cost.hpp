#pragma once

#include <cstdint>

#include "coba/corpus.hpp"
#include "coba/llm.hpp"

namespace coba {

struct Rates {
  double input_per_million = 0.15;
  double output_per_million = 0.60;
};

struct CostEstimate {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double usd = 0.0;
};

CostEstimate cost_of(const TokenUsage& usage, const Rates& rates);

/// Per-example call plan used by the estimator. Template sizes default to
/// the built-in prompts for the task.
struct CostModel {
  TaskKind task = TaskKind::SentimentBinary;
  int n_variants = 1;
  double expected_principal_triples = 1.0;
  /// Characters of one serialized triple line.
  std::size_t triple_chars = 60;
};

/// Approximate spend with chars/4 tokens per call: one decomposition call
/// (template + text in, triples out), one modification call per expected
/// principal triple, and one reconstruction call per variant (template +
/// triples in, text out).
CostEstimate estimate_cost(std::int64_t n_examples, std::int64_t avg_chars,
                           const Rates& rates, const CostModel& model);

}  // namespace coba
