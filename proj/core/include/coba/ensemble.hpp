#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "coba/importance.hpp"

namespace coba {

/// Principal (W_p) and spurious (W_s) words. Always disjoint.
struct WordSets {
  std::set<std::string> principal;
  std::set<std::string> spurious;

  bool operator==(const WordSets&) const = default;
};

struct VoteTally {
  /// word -> number of models whose list contains it.
  std::map<std::string, int> counts;
};

struct VoteResult {
  WordSets sets;
  VoteTally tally;
  int tau = 0;
};

/// Default threshold (|M| + 1) / 2. Throws EvenEnsembleWithoutTau for an
/// even ensemble size.
int default_tau(std::size_t n_models);

/// Majority vote: count(w) >= tau -> principal, 1 <= count(w) < tau ->
/// spurious. Each model counts at most once per word. Input order of the
/// lists does not matter.
VoteResult vote(const std::vector<TopKWords>& lists,
                std::optional<int> tau = std::nullopt);

/// spurious := spurious ∪ (lexicon \ principal).
WordSets extend_spurious(const WordSets& ws,
                         const std::set<std::string>& lexicon);

/// One lowercased token per line; blank lines and `#` comments ignored.
std::set<std::string> parse_word_list(std::string_view content);
std::set<std::string> load_word_list(const std::filesystem::path& path);

}  // namespace coba
