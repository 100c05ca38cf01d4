#include "coba/importance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Dense>

#include "coba/error.hpp"
#include "coba/rng.hpp"

namespace coba {

namespace {

constexpr std::size_t kBatch = 256;

/// Memoised p(y | mask) with batched classifier calls.
class MaskEvaluator {
 public:
  MaskEvaluator(const Classifier& model, const ScoringView& view)
      : model_(model), view_(view) {}

  void evaluate(const std::vector<std::vector<bool>>& masks) {
    std::vector<const std::vector<bool>*> todo;
    for (const auto& m : masks) {
      if (!cache_.count(m)) {
        cache_.emplace(m, 0.0);
        todo.push_back(&m);
      }
    }
    for (std::size_t start = 0; start < todo.size(); start += kBatch) {
      const std::size_t end = std::min(todo.size(), start + kBatch);
      std::vector<std::string> texts;
      for (std::size_t i = start; i < end; ++i) texts.push_back(view_.render(*todo[i]));
      const auto rows = model_.predict_proba(texts);
      if (rows.size() != texts.size()) {
        throw Error(ErrorCode::ShapeMismatch, "classifier returned wrong row count");
      }
      for (std::size_t i = start; i < end; ++i) {
        const auto& probs = rows[i - start].probs;
        if (view_.label_index() >= probs.size()) {
          throw Error(ErrorCode::ShapeMismatch, "probability row too short");
        }
        cache_[*todo[i]] = probs[view_.label_index()];
      }
    }
  }

  double operator()(const std::vector<bool>& mask) const { return cache_.at(mask); }

 private:
  const Classifier& model_;
  const ScoringView& view_;
  std::unordered_map<std::vector<bool>, double> cache_;
};

std::vector<ImportanceScore> to_scores(const ScoringView& view,
                                       const std::vector<double>& values) {
  std::vector<ImportanceScore> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({i, view.tokens()[i].text, values[i]});
  }
  return out;
}

ScoringView make_view(const Classifier& model, const Example& example) {
  ScoringView view(example, model.task());
  if (view.size() == 0) {
    throw Error(ErrorCode::EmptyText, "example '" + example.id + "' has no tokens");
  }
  return view;
}

}  // namespace

ScoringView::ScoringView(const Example& example, TaskKind task)
    : label_(example.label), label_index_(coba::label_index(task, example.label)) {
  text_ = example.text1;
  tokens_ = tokenize_spans(example.text1);
  if (task == TaskKind::Nli3Way && example.text2) {
    const std::size_t byte_shift = example.text1.size() + kSeparator.size();
    const std::size_t char_shift =
        char_length(example.text1) + char_length(kSeparator);
    text_ += kSeparator;
    text_ += *example.text2;
    for (auto tok : tokenize_spans(*example.text2)) {
      tok.byte_begin += byte_shift;
      tok.byte_end += byte_shift;
      tok.char_begin += char_shift;
      tok.char_end += char_shift;
      tokens_.push_back(std::move(tok));
    }
  }
}

std::string ScoringView::render(const std::vector<bool>& present) const {
  if (present.size() != tokens_.size()) {
    throw Error(ErrorCode::InvalidArgument, "mask size does not match token count");
  }
  if (std::none_of(present.begin(), present.end(), [](bool b) { return b; })) {
    return {};
  }
  std::string out;
  out.reserve(text_.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (present[i]) continue;
    out.append(text_, cursor, tokens_[i].byte_begin - cursor);
    cursor = tokens_[i].byte_end;
  }
  out.append(text_, cursor, std::string::npos);
  return out;
}

std::vector<ImportanceScore> occlusion_importance(const Classifier& model,
                                                  const Example& example) {
  const auto view = make_view(model, example);
  const std::size_t n = view.size();
  std::vector<std::vector<bool>> masks;
  masks.emplace_back(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    masks.emplace_back(n, true);
    masks.back()[i] = false;
  }
  MaskEvaluator v(model, view);
  v.evaluate(masks);
  const double full = v(masks[0]);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = full - v(masks[i + 1]);
  return to_scores(view, scores);
}

std::vector<ImportanceScore> lime_importance(const Classifier& model,
                                             const Example& example,
                                             const LimeOptions& options) {
  const auto view = make_view(model, example);
  const std::size_t n = view.size();
  if (!(options.kernel_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "kernel_width must be positive");
  }

  std::vector<std::vector<bool>> masks;
  if (options.exhaustive) {
    if (n > 20) {
      throw Error(ErrorCode::InvalidArgument, "exhaustive LIME limited to 20 tokens");
    }
    const std::uint64_t total = std::uint64_t{1} << n;
    masks.reserve(total);
    // Full mask first, then every other subset.
    for (std::uint64_t b = total; b-- > 0;) {
      std::vector<bool> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = (b >> i) & 1U;
      masks.push_back(std::move(m));
    }
  } else {
    if (options.n_samples < 0 || static_cast<std::size_t>(options.n_samples) < n + 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "LIME needs at least n_tokens + 1 samples");
    }
    Rng rng(options.seed);
    masks.emplace_back(n, true);
    for (int s = 1; s < options.n_samples; ++s) {
      std::vector<bool> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = rng.bernoulli(0.5);
      masks.push_back(std::move(m));
    }
  }

  MaskEvaluator v(model, view);
  v.evaluate(masks);

  const auto dim = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd x(dim);
  const double width2 = options.kernel_width * options.kernel_width;
  for (const auto& m : masks) {
    std::size_t zeros = 0;
    x[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[static_cast<Eigen::Index>(i + 1)] = m[i] ? 1.0 : 0.0;
      zeros += m[i] ? 0 : 1;
    }
    const double d = static_cast<double>(zeros) / static_cast<double>(n);
    const double w = std::exp(-d * d / width2);
    gram.noalias() += w * x * x.transpose();
    rhs.noalias() += w * v(m) * x;
  }
  for (Eigen::Index i = 1; i < dim; ++i) gram(i, i) += options.ridge;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw Error(ErrorCode::SingularFit, "LIME design matrix is not positive definite");
  }
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  if (!beta.allFinite() || ldlt.vectorD().minCoeff() <= 0.0) {
    throw Error(ErrorCode::SingularFit, "LIME weighted least squares is singular");
  }
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = beta[static_cast<Eigen::Index>(i + 1)];
  return to_scores(view, scores);
}

std::vector<ImportanceScore> shapley_importance(const Classifier& model,
                                                const Example& example,
                                                const ShapleyOptions& options) {
  const auto view = make_view(model, example);
  const std::size_t n = view.size();
  MaskEvaluator v(model, view);
  std::vector<double> phi(n, 0.0);

  if (options.mode == ShapleyMode::Exact) {
    if (n > kMaxExactShapleyTokens) {
      throw Error(ErrorCode::TooManyTokensForExact,
                  std::to_string(n) + " tokens exceeds the exact-mode limit of " +
                      std::to_string(kMaxExactShapleyTokens));
    }
    const std::uint32_t total = 1U << n;
    std::vector<std::vector<bool>> masks(total, std::vector<bool>(n));
    for (std::uint32_t b = 0; b < total; ++b) {
      for (std::size_t i = 0; i < n; ++i) masks[b][i] = (b >> i) & 1U;
    }
    v.evaluate(masks);
    std::vector<double> value(total);
    for (std::uint32_t b = 0; b < total; ++b) value[b] = v(masks[b]);

    // weight(s) = s! (n - s - 1)! / n!
    std::vector<double> weight(n);
    for (std::size_t s = 0; s < n; ++s) {
      double w = 1.0 / static_cast<double>(n);
      // 1 / (n * C(n-1, s))
      double binom = 1.0;
      for (std::size_t k = 1; k <= s; ++k) {
        binom = binom * static_cast<double>(n - 1 - s + k) / static_cast<double>(k);
      }
      weight[s] = w / binom;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t bit = 1U << i;
      double acc = 0.0;
      for (std::uint32_t b = 0; b < total; ++b) {
        if (b & bit) continue;
        acc += weight[static_cast<std::size_t>(std::popcount(b))] *
               (value[b | bit] - value[b]);
      }
      phi[i] = acc;
    }
    return to_scores(view, phi);
  }

  if (options.n_permutations < 1) {
    throw Error(ErrorCode::InvalidArgument, "sampled Shapley needs n_permutations >= 1");
  }
  Rng rng(options.seed);
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::vector<bool>> masks;
  std::vector<std::size_t> order(n);
  for (int p = 0; p < options.n_permutations; ++p) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    perms.push_back(order);
    std::vector<bool> m(n, false);
    masks.push_back(m);
    for (auto idx : order) {
      m[idx] = true;
      masks.push_back(m);
    }
  }
  v.evaluate(masks);
  for (const auto& perm : perms) {
    std::vector<bool> m(n, false);
    double prev = v(m);
    for (auto idx : perm) {
      m[idx] = true;
      const double cur = v(m);
      phi[idx] += cur - prev;
      prev = cur;
    }
  }
  for (double& p : phi) p /= static_cast<double>(options.n_permutations);
  return to_scores(view, phi);
}

std::vector<ImportanceScore> align_attributions(const ScoringView& view,
                                                const AttributionReply& reply) {
  if (reply.tokens.size() != reply.spans.size() ||
      reply.scores.size() != reply.spans.size()) {
    throw Error(ErrorCode::AlignmentFailure,
                "tokens, spans and scores have different lengths");
  }
  const std::size_t text_chars = char_length(view.text());
  for (const auto& [b, e] : reply.spans) {
    if (b > e || e > text_chars) {
      throw Error(ErrorCode::AlignmentFailure,
                  "span [" + std::to_string(b) + ", " + std::to_string(e) +
                      ") outside the text");
    }
  }
  std::vector<double> scores(view.size(), 0.0);
  for (std::size_t t = 0; t < view.size(); ++t) {
    const auto& tok = view.tokens()[t];
    bool covered = false;
    for (std::size_t s = 0; s < reply.spans.size(); ++s) {
      const auto [b, e] = reply.spans[s];
      if (b < tok.char_end && tok.char_begin < e) {
        scores[t] += reply.scores[s];
        covered = true;
      }
    }
    if (!covered) {
      throw Error(ErrorCode::AlignmentFailure,
                  "no server token overlaps '" + tok.text + "'");
    }
  }
  return to_scores(view, scores);
}

std::vector<ImportanceScore> remote_attributions(const RemoteClassifier& model,
                                                 const Example& example,
                                                 const std::string& method,
                                                 std::optional<int> steps) {
  const auto view = make_view(model, example);
  const auto served = model.models();
  const auto it = std::find_if(served.begin(), served.end(),
                               [&](const ServedModel& m) { return m.name == model.model(); });
  if (it == served.end()) {
    throw Error(ErrorCode::BackendUnavailable,
                "server does not serve model '" + model.model() + "'");
  }
  if (std::find(it->capabilities.begin(), it->capabilities.end(), method) ==
      it->capabilities.end()) {
    throw Error(ErrorCode::UnsupportedMethod,
                "model '" + model.model() + "' does not offer '" + method + "'");
  }
  return align_attributions(view, model.attributions(view.text(), method, steps));
}

TopKWords top_k(const std::vector<ImportanceScore>& scores, int k,
                std::string model_name) {
  if (k < 1) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  std::vector<const ImportanceScore*> ranked;
  for (const auto& s : scores) ranked.push_back(&s);
  std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) {
    if (a->score != b->score) return a->score > b->score;
    if (a->token_index != b->token_index) return a->token_index < b->token_index;
    return a->token < b->token;
  });
  TopKWords out{std::move(model_name), {}};
  for (const auto* s : ranked) {
    if (static_cast<int>(out.words.size()) == k) break;
    if (std::find(out.words.begin(), out.words.end(), s->token) == out.words.end()) {
      out.words.push_back(s->token);
    }
  }
  return out;
}

std::string_view to_string(ImportanceMethod method) noexcept {
  switch (method) {
    case ImportanceMethod::Occlusion: return "occlusion";
    case ImportanceMethod::Lime: return "lime";
    case ImportanceMethod::Shapley: return "shapley";
    case ImportanceMethod::Remote: return "remote";
  }
  return "?";
}

ImportanceMethod parse_importance_method(std::string_view name) {
  for (auto m : {ImportanceMethod::Occlusion, ImportanceMethod::Lime,
                 ImportanceMethod::Shapley, ImportanceMethod::Remote}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown importance method '" + std::string(name) + "'");
}

std::vector<ImportanceScore> score_importance(const Classifier& model,
                                              const Example& example,
                                              const ImportanceConfig& config,
                                              std::uint64_t seed) {
  switch (config.method) {
    case ImportanceMethod::Occlusion:
      return occlusion_importance(model, example);
    case ImportanceMethod::Lime: {
      auto opts = config.lime;
      opts.seed = seed;
      // Long texts get the minimum sample count the fit needs.
      const auto n = static_cast<int>(ScoringView(example, model.task()).size());
      opts.n_samples = std::max(opts.n_samples, n + 1);
      return lime_importance(model, example, opts);
    }
    case ImportanceMethod::Shapley: {
      auto opts = config.shapley;
      opts.seed = seed;
      return shapley_importance(model, example, opts);
    }
    case ImportanceMethod::Remote: {
      const auto* remote = dynamic_cast<const RemoteClassifier*>(&model);
      if (!remote) {
        throw Error(ErrorCode::InvalidArgument,
                    "remote attributions need a remote classifier, got '" +
                        model.name() + "'");
      }
      return remote_attributions(*remote, example, config.remote_method,
                                 config.remote_steps);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown importance method");
}

}  // namespace coba
