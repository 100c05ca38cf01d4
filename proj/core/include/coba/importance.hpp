#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coba/classifier.hpp"
#include "coba/corpus.hpp"
#include "coba/tokenize.hpp"

namespace coba {

struct ImportanceScore {
  std::size_t token_index = 0;
  std::string token;
  double score = 0.0;
};

struct TopKWords {
  std::string model_name;
  std::vector<std::string> words;

  bool operator==(const TopKWords&) const = default;
};

/// The canonical tokens of an example and the text a classifier sees when
/// only a subset of them is present. NLI examples are scored on
/// "text1 [SEP] text2"; the separator is never a token.
class ScoringView {
 public:
  static constexpr std::string_view kSeparator = " [SEP] ";

  ScoringView(const Example& example, TaskKind task);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<TokenSpan>& tokens() const noexcept { return tokens_; }
  /// The full classifier input.
  const std::string& text() const noexcept { return text_; }
  Label label() const noexcept { return label_; }
  std::size_t label_index() const noexcept { return label_index_; }

  /// Text with the spans of absent tokens cut out. An all-absent mask renders
  /// as the empty string.
  std::string render(const std::vector<bool>& present) const;

 private:
  std::string text_;
  std::vector<TokenSpan> tokens_;
  Label label_;
  std::size_t label_index_;
};

/// score_i = p(y | full text) - p(y | text without token i).
std::vector<ImportanceScore> occlusion_importance(const Classifier& model,
                                                  const Example& example);

struct LimeOptions {
  int n_samples = 500;
  double kernel_width = 0.25;
  std::uint64_t seed = 0;
  /// Enumerate all 2^n masks instead of sampling (n <= 20).
  bool exhaustive = false;
  double ridge = 1e-6;
};

/// Weighted least squares surrogate of p(y | mask) on token-presence bits
/// with kernel exp(-d^2 / width^2), d the normalised Hamming distance to the
/// full mask. The full mask is always the first sample.
std::vector<ImportanceScore> lime_importance(const Classifier& model,
                                             const Example& example,
                                             const LimeOptions& options);

enum class ShapleyMode { Exact, Sampled };

struct ShapleyOptions {
  ShapleyMode mode = ShapleyMode::Sampled;
  int n_permutations = 200;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxExactShapleyTokens = 12;

/// v(S) = p(y | only tokens in S present). Exact mode enumerates all
/// subsets; sampled mode averages marginal contributions over random
/// permutations.
std::vector<ImportanceScore> shapley_importance(const Classifier& model,
                                                const Example& example,
                                                const ShapleyOptions& options);

/// Maps sub-token attribution scores onto canonical tokens: each token
/// receives the sum of the scores of sub-tokens whose character spans
/// overlap its own. Throws AlignmentFailure on inconsistent replies.
std::vector<ImportanceScore> align_attributions(const ScoringView& view,
                                                const AttributionReply& reply);

/// Integrated gradients (or another server-side method) via the model
/// server. Throws UnsupportedMethod if the server does not advertise
/// `method` for this model.
std::vector<ImportanceScore> remote_attributions(
    const RemoteClassifier& model, const Example& example,
    const std::string& method, std::optional<int> steps = std::nullopt);

/// Ranks by score descending (ties: earlier position, then lexicographic),
/// keeps the best occurrence of each token string, truncates to k.
TopKWords top_k(const std::vector<ImportanceScore>& scores, int k,
                std::string model_name = {});

enum class ImportanceMethod { Occlusion, Lime, Shapley, Remote };

std::string_view to_string(ImportanceMethod method) noexcept;
ImportanceMethod parse_importance_method(std::string_view name);

struct ImportanceConfig {
  ImportanceMethod method = ImportanceMethod::Lime;
  LimeOptions lime;
  ShapleyOptions shapley;
  std::string remote_method = "integrated_gradients";
  std::optional<int> remote_steps;
};

/// Dispatches to the configured estimator. `seed` replaces the estimator's
/// own seed so callers can derive per-example streams.
std::vector<ImportanceScore> score_importance(const Classifier& model,
                                              const Example& example,
                                              const ImportanceConfig& config,
                                              std::uint64_t seed);

}  // namespace coba
