#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "coba/corpus.hpp"

namespace coba {

struct WordSets;

/// One (subject, predicate, object) proposition. `group` is the sentence
/// group (1 = text1 / premise, 2 = text2 / hypothesis); `ordinal` is the
/// zero-based position assigned at decomposition.
struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  int group = 1;
  int ordinal = 0;

  bool operator==(const Triple&) const = default;
};

enum class TripleCategory { Normal, Spurious, Principal };

std::string_view to_string(TripleCategory category) noexcept;

struct CategorizedTriple {
  Triple triple;
  TripleCategory category = TripleCategory::Normal;

  bool operator==(const CategorizedTriple&) const = default;
};

struct TripleSet {
  TaskKind task = TaskKind::SentimentBinary;
  std::vector<CategorizedTriple> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  std::size_t count(TripleCategory category) const noexcept;
  std::size_t count_group(int group) const noexcept;

  bool operator==(const TripleSet&) const = default;
};

/// Checks the structural invariants: non-empty, trimmed slots non-empty,
/// groups valid for the task, ordinals unique within a group. Throws
/// InvalidArgument / MissingGroup.
void validate(const TripleSet& ts);

struct ParseResult {
  TripleSet triples;
  /// Non-blank lines that did not match the triple grammar (headers excluded).
  std::size_t skipped_lines = 0;
};

/// Parses the line grammar `<n>. subject | predicate | object`. For NLI the
/// numbering is `<g>-<n>.` and/or lines sit under `sent1:` / `sent2:`
/// headers. When the numbers of a group form a permutation of 1..m they
/// become the ordinals (n - 1); otherwise ordinals follow appearance order.
ParseResult parse_triples(std::string_view raw, TaskKind task);

/// Parses a single pipe-delimited triple line, with or without numbering.
/// Returns false if the line does not match.
bool parse_triple_line(std::string_view line, Triple& out);

enum class Numbering { Original, Sequential };

/// One `<n>. subject | predicate | object` line per triple in list order.
/// NLI output is grouped under `sent1:` / `sent2:` headers with `<g>-<n>.`
/// numbering. Original numbering prints ordinal + 1; sequential numbers by
/// position. Throws DelimiterCollision if a slot contains '|' or a newline.
std::string serialize_triples(const TripleSet& ts,
                              Numbering numbering = Numbering::Original);

/// `subject | predicate | object` with no numbering.
std::string format_triple(const Triple& t);

/// Spurious if any slot token is in W_s, else Principal if any slot token is
/// in W_p, else Normal. Order is preserved.
TripleSet categorize(const TripleSet& ts, const WordSets& ws);

}  // namespace coba
