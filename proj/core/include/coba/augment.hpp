#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "coba/classifier.hpp"
#include "coba/corpus.hpp"
#include "coba/ensemble.hpp"
#include "coba/importance.hpp"
#include "coba/llm.hpp"
#include "coba/rng.hpp"
#include "coba/triple.hpp"

namespace coba {

struct AugmentationConfig {
  int k = 5;
  std::optional<int> tau;
  double p_delete = 0.1;
  int n_variants = 1;
  std::optional<std::filesystem::path> gender_lexicon_path;
  std::optional<std::filesystem::path> extra_spurious_path;
  bool verify = false;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

enum class AugmentOp { Modify, GenderSwap, Permute, Delete };

std::string_view to_string(AugmentOp op) noexcept;

struct CounterbiasRecord {
  std::string source_id;
  Label original_label = Label::Positive;
  Label target_label = Label::Negative;
  std::string text1;
  std::optional<std::string> text2;
  TripleSet triples_before;
  TripleSet triples_after;
  std::vector<AugmentOp> applied_ops;
  WordSets word_sets;
  int variant_index = 0;
  std::optional<bool> verified;
};

/// The other sentiment label, or a uniform choice between the two other NLI
/// labels. Throws UnknownLabel outside the task's label space.
Label flip_label(Label y, TaskKind task, Rng& rng);

/// Bidirectional word pairs, lowercased.
class GenderLexicon {
 public:
  GenderLexicon() = default;
  /// Throws AsymmetricLexicon unless every pair has its inverse.
  explicit GenderLexicon(std::map<std::string, std::string> pairs);

  /// Adds both directions of each pair. Throws AsymmetricLexicon on a word
  /// that would map to two different counterparts.
  static GenderLexicon from_pairs(
      const std::vector<std::pair<std::string, std::string>>& pairs);
  /// Two whitespace-separated columns per line, `#` comments.
  static GenderLexicon parse(std::string_view content);
  static GenderLexicon load(const std::filesystem::path& path);
  /// A starter list of common English gendered words.
  static GenderLexicon builtin();

  const std::map<std::string, std::string>& pairs() const noexcept {
    return pairs_;
  }
  std::set<std::string> words() const;
  bool empty() const noexcept { return pairs_.empty(); }

  /// Replaces lexicon words (whole tokens, case-insensitive, possessive 's
  /// allowed) preserving lower / Initial / UPPER case. Returns the number of
  /// replacements through `count` when given.
  std::string swap(std::string_view text, int* count = nullptr) const;

 private:
  std::map<std::string, std::string> pairs_;
};

TripleSet gender_swap(const TripleSet& ts, const GenderLexicon& lexicon,
                      int* replacements = nullptr);

/// Shuffles Normal triples among the positions Normal triples occupy.
TripleSet permute_normals(const TripleSet& ts, Rng& rng);

/// Drops each Normal triple with probability p_delete. A sentence group that
/// would become empty keeps one uniformly chosen triple.
TripleSet delete_normals(const TripleSet& ts, double p_delete, Rng& rng);

struct AugmentDeps {
  std::vector<ClassifierHandle> ensemble;
  ImportanceConfig importance;
  const LlmBackend* backend = nullptr;
  PromptSet prompts;
  LlmParams ext_params = default_params(PromptStage::Ext);
  LlmParams mod_params = default_params(PromptStage::Mod);
  LlmParams rec_params = default_params(PromptStage::Rec);
  GenderLexicon gender;
  std::set<std::string> extra_spurious;
};

/// Resolves the lexicon files named in `cfg` (the built-in gender list when
/// no path is given).
void load_lexicons(const AugmentationConfig& cfg, AugmentDeps& deps);

struct ExampleTrace {
  std::vector<TopKWords> top_k;
  bool no_principal_triples = false;
  std::size_t skipped_lines = 0;
};

/// Full counterbias pipeline for one example: decompose, parse, score
/// importance per model, vote, extend spurious words, categorize, flip the
/// label, modify principal triples, swap gender words, then for each variant
/// permute and delete normal triples, serialize and reconstruct.
std::vector<CounterbiasRecord> generate_counterbias(
    const Example& example, TaskKind task, const AugmentDeps& deps,
    const AugmentationConfig& cfg, ExampleTrace* trace = nullptr);

struct AugmentSummary {
  std::size_t examples = 0;
  std::size_t succeeded = 0;
  std::size_t skipped = 0;
  std::size_t records = 0;
  std::size_t no_principal_warnings = 0;
  std::size_t unparsed_lines = 0;
  /// Fraction of spurious words kept in spurious triples that still appear
  /// in the reconstructed text.
  double spurious_word_retention = 0.0;
  std::size_t verified_true = 0;
  std::size_t verified_total = 0;
  std::map<std::string, std::string> failures;  // example id -> reason
};

struct AugmentResult {
  std::vector<CounterbiasRecord> records;  // source order
  std::vector<std::pair<std::string, std::vector<TopKWords>>> top_k;
  AugmentSummary summary;
};

/// Runs the pipeline over a dataset on `workers` threads. Output order
/// follows the source order. Throws AllExamplesFailed if nothing was
/// produced.
AugmentResult augment_dataset(const Dataset& ds, const AugmentDeps& deps,
                              const AugmentationConfig& cfg, int workers = 1);

/// One JSON object per record.
std::string records_to_jsonl(const std::vector<CounterbiasRecord>& records,
                             TaskKind task);
/// D_ori followed by the records as ordinary examples.
Dataset merge_dataset(const Dataset& original,
                      const std::vector<CounterbiasRecord>& records);

}  // namespace coba
