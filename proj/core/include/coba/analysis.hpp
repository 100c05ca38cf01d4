#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coba/importance.hpp"

namespace coba {

class HttpClient;

// ---------------------------------------------------------------------------
// Cross-model agreement of top-K words.

struct OverlapReport {
  /// Examples where one word is in every model's list.
  double all_models_ratio = 0.0;
  /// Examples where some word is in at least two models' lists.
  double two_or_more_ratio = 0.0;
  /// Examples with a word shared by >= 2 models but none shared by all.
  double two_or_more_not_all_ratio = 0.0;
  std::size_t n_examples = 0;
};

struct ExampleTopK {
  std::string example_id;
  std::vector<TopKWords> lists;
};

/// Throws InconsistentModels if examples carry different model sets and
/// InvalidArgument for an empty input.
OverlapReport duplication_ratio(const std::vector<ExampleTopK>& examples);

// ---------------------------------------------------------------------------
// POS buckets of important words.

enum class PosBucket { Noun, Verb, AdjAdv, Others };

inline constexpr std::array<PosBucket, 4> kPosBuckets = {
    PosBucket::Noun, PosBucket::Verb, PosBucket::AdjAdv, PosBucket::Others};

std::string_view to_string(PosBucket bucket) noexcept;
/// Penn Treebank tag (NN*, VB*, JJ*, RB*) to bucket.
PosBucket bucket_from_penn(std::string_view tag) noexcept;

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual PosBucket tag(std::string_view word) const = 0;
};

/// Closed-class lexicon plus suffix rules (-ly -> AdjAdv, -ing/-ed -> Verb,
/// -tion/-ness/-ment -> Noun, ...). Unknown words default to Noun.
class HeuristicTagger final : public Tagger {
 public:
  HeuristicTagger();
  PosBucket tag(std::string_view word) const override;

 private:
  std::map<std::string, PosBucket, std::less<>> lexicon_;
};

/// Tags read from `word<TAB>TAG` lines (Penn tags or bucket names), falling
/// back to another tagger for words not listed.
class TagFileTagger final : public Tagger {
 public:
  TagFileTagger(std::string_view content, std::shared_ptr<const Tagger> fallback);
  static std::unique_ptr<TagFileTagger> load(
      const std::filesystem::path& path, std::shared_ptr<const Tagger> fallback);
  PosBucket tag(std::string_view word) const override;

 private:
  std::map<std::string, PosBucket, std::less<>> tags_;
  std::shared_ptr<const Tagger> fallback_;
};

/// Tags every word with one bucket.
class ConstantTagger final : public Tagger {
 public:
  explicit ConstantTagger(PosBucket bucket) : bucket_(bucket) {}
  PosBucket tag(std::string_view) const override { return bucket_; }

 private:
  PosBucket bucket_;
};

struct PosReport {
  std::map<PosBucket, std::size_t> counts;
  std::map<PosBucket, double> ratios;
  std::size_t total = 0;
};

/// Throws EmptyWordList.
PosReport pos_ratio(const std::vector<std::string>& words, const Tagger& tagger);

// ---------------------------------------------------------------------------
// Diversity.

enum class EmbeddingSource { Remote, LocalTfidf };

struct EmbeddingVector {
  std::vector<double> values;
  EmbeddingSource source = EmbeddingSource::LocalTfidf;
};

/// L2-normalised TF-IDF vectors over a vocabulary fitted on `texts`.
std::vector<EmbeddingVector> embed_tfidf(const std::vector<std::string>& texts);

/// POST {endpoint}/embeddings. Throws BackendUnavailable or
/// DimensionMismatch.
std::vector<EmbeddingVector> embed_remote(const HttpClient& client,
                                          const std::vector<std::string>& texts);

/// Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Share of total variance captured by the top `n_components` eigenvalues of
/// the sample covariance. Throws DegenerateData when total variance is 0.
double pca_explained_variance(const std::vector<EmbeddingVector>& vectors,
                              int n_components);

struct DiversityReport {
  std::size_t pairs = 0;
  double mean_cosine = 0.0;
  double pca_variance = 0.0;
  int n_components = 0;
};

/// Pairs original and augmented texts (augmented[i] derives from
/// original[pairs[i]]) and reports mean cosine similarity plus the PCA
/// explained variance of the augmented embeddings.
DiversityReport diversity(const std::vector<EmbeddingVector>& original,
                          const std::vector<EmbeddingVector>& augmented,
                          const std::vector<std::size_t>& pairs,
                          int n_components);

// ---------------------------------------------------------------------------
// Report rendering.

nlohmann::json to_json(const OverlapReport& report);
nlohmann::json to_json(const PosReport& report);
nlohmann::json to_json(const DiversityReport& report);

/// Aligned-column plain-text table.
std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

}  // namespace coba
