#include "coba/ensemble.hpp"

#include <fstream>
#include <sstream>

#include "coba/error.hpp"
#include "coba/tokenize.hpp"

namespace coba {

int default_tau(std::size_t n_models) {
  if (n_models == 0) {
    throw Error(ErrorCode::InvalidArgument, "ensemble is empty");
  }
  if (n_models % 2 == 0) {
    throw Error(ErrorCode::EvenEnsembleWithoutTau,
                "ensemble of " + std::to_string(n_models) +
                    " models needs an explicit tau");
  }
  return static_cast<int>((n_models + 1) / 2);
}

VoteResult vote(const std::vector<TopKWords>& lists, std::optional<int> tau) {
  if (lists.empty()) throw Error(ErrorCode::InvalidArgument, "no word lists to vote on");
  VoteResult out;
  out.tau = tau ? *tau : default_tau(lists.size());
  if (out.tau < 1) throw Error(ErrorCode::InvalidArgument, "tau must be >= 1");
  for (const auto& list : lists) {
    const std::set<std::string> unique(list.words.begin(), list.words.end());
    for (const auto& w : unique) ++out.tally.counts[w];
  }
  for (const auto& [word, count] : out.tally.counts) {
    (count >= out.tau ? out.sets.principal : out.sets.spurious).insert(word);
  }
  return out;
}

WordSets extend_spurious(const WordSets& ws, const std::set<std::string>& lexicon) {
  WordSets out = ws;
  for (const auto& w : lexicon) {
    if (!out.principal.count(w)) out.spurious.insert(w);
  }
  return out;
}

std::set<std::string> parse_word_list(std::string_view content) {
  std::set<std::string> words;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    auto view = std::string_view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (!view.empty()) words.insert(to_lower(view));
  }
  return words;
}

std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_word_list(ss.str());
}

}  // namespace coba
