#include "coba/triple.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "coba/ensemble.hpp"
#include "coba/error.hpp"
#include "coba/tokenize.hpp"

namespace coba {

namespace {

bool parse_number(std::string_view s, std::size_t& pos, int& value) {
  const std::size_t start = pos;
  long v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    if (v > 1'000'000) return false;
    ++pos;
  }
  if (pos == start) return false;
  value = static_cast<int>(v);
  return true;
}

struct NumberedLine {
  std::optional<int> group;
  std::optional<int> number;
  Triple triple;
};

// `[<n>.|<g>-<n>.] subject | predicate | object`
bool parse_numbered(std::string_view line, NumberedLine& out, bool require_number) {
  line = trim(line);
  std::size_t pos = 0;
  int first = 0;
  out = {};
  if (parse_number(line, pos, first)) {
    int second = 0;
    if (pos < line.size() && line[pos] == '-') {
      ++pos;
      if (!parse_number(line, pos, second)) return false;
      out.group = first;
      out.number = second;
    } else {
      out.number = first;
    }
    if (pos >= line.size() || line[pos] != '.') return false;
    ++pos;
    line = line.substr(pos);
  } else if (require_number) {
    return false;
  }
  const auto p1 = line.find('|');
  if (p1 == std::string_view::npos) return false;
  const auto p2 = line.find('|', p1 + 1);
  if (p2 == std::string_view::npos) return false;
  if (line.find('|', p2 + 1) != std::string_view::npos) return false;
  auto s = trim(line.substr(0, p1));
  auto p = trim(line.substr(p1 + 1, p2 - p1 - 1));
  auto o = trim(line.substr(p2 + 1));
  if (s.empty() || p.empty() || o.empty()) return false;
  out.triple.subject = std::string(s);
  out.triple.predicate = std::string(p);
  out.triple.object = std::string(o);
  return true;
}

// "sent1:" / "sent2:" (case-insensitive); returns the group or 0.
int parse_header(std::string_view line) {
  const auto lower = to_lower(trim(line));
  if (lower == "sent1:") return 1;
  if (lower == "sent2:") return 2;
  return 0;
}

void check_slot(const std::string& slot) {
  if (slot.find_first_of("|\n\r") != std::string::npos) {
    throw Error(ErrorCode::DelimiterCollision,
                "triple slot contains a delimiter: '" + slot + "'");
  }
}

}  // namespace

std::string_view to_string(TripleCategory category) noexcept {
  switch (category) {
    case TripleCategory::Normal: return "normal";
    case TripleCategory::Spurious: return "spurious";
    case TripleCategory::Principal: return "principal";
  }
  return "?";
}

std::size_t TripleSet::count(TripleCategory category) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                    [&](const auto& e) { return e.category == category; }));
}

std::size_t TripleSet::count_group(int group) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                    [&](const auto& e) { return e.triple.group == group; }));
}

void validate(const TripleSet& ts) {
  if (ts.empty()) throw Error(ErrorCode::InvalidArgument, "empty triple set");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : ts.entries) {
    const auto& t = e.triple;
    if (trim(t.subject).empty() || trim(t.predicate).empty() ||
        trim(t.object).empty()) {
      throw Error(ErrorCode::InvalidArgument, "triple with an empty slot");
    }
    const int max_group = ts.task == TaskKind::Nli3Way ? 2 : 1;
    if (t.group < 1 || t.group > max_group) {
      throw Error(ErrorCode::InvalidArgument,
                  "invalid sentence group " + std::to_string(t.group));
    }
    if (t.ordinal < 0 || !seen.emplace(t.group, t.ordinal).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate or negative ordinal in group " +
                      std::to_string(t.group));
    }
  }
  if (ts.task == TaskKind::Nli3Way) {
    for (int g : {1, 2}) {
      if (ts.count_group(g) == 0) {
        throw Error(ErrorCode::MissingGroup,
                    "sentence group " + std::to_string(g) + " has no triples");
      }
    }
  }
}

bool parse_triple_line(std::string_view line, Triple& out) {
  NumberedLine parsed;
  if (!parse_numbered(line, parsed, false)) return false;
  out = parsed.triple;
  return true;
}

ParseResult parse_triples(std::string_view raw, TaskKind task) {
  struct Pending {
    Triple triple;
    std::optional<int> number;
  };
  ParseResult result;
  result.triples.task = task;
  std::vector<Pending> pending;
  int current_group = 1;

  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    const auto line = raw.substr(start, end - start);
    start = end + 1;

    if (!trim(line).empty()) {
      if (int header = parse_header(line)) {
        current_group = header;
      } else {
        NumberedLine parsed;
        bool ok = parse_numbered(line, parsed, true);
        if (ok) {
          int group = parsed.group.value_or(
              task == TaskKind::Nli3Way ? current_group : 1);
          const int max_group = task == TaskKind::Nli3Way ? 2 : 1;
          if (group < 1 || group > max_group) {
            ok = false;
          } else {
            parsed.triple.group = group;
            pending.push_back({std::move(parsed.triple), parsed.number});
          }
        }
        if (!ok) ++result.skipped_lines;
      }
    }
    if (end == raw.size()) break;
  }

  if (pending.empty()) {
    throw Error(ErrorCode::EmptyDecomposition, "no triples in LLM output");
  }

  // Ordinals: the printed numbers when they form 1..m within the group,
  // otherwise appearance order.
  std::map<int, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    by_group[pending[i].triple.group].push_back(i);
  }
  for (auto& [group, members] : by_group) {
    std::vector<int> numbers;
    bool all_numbered = true;
    for (auto i : members) {
      if (!pending[i].number) {
        all_numbered = false;
        break;
      }
      numbers.push_back(*pending[i].number);
    }
    bool permutation = all_numbered;
    if (permutation) {
      std::sort(numbers.begin(), numbers.end());
      for (std::size_t k = 0; k < numbers.size(); ++k) {
        if (numbers[k] != static_cast<int>(k) + 1) {
          permutation = false;
          break;
        }
      }
    }
    int next = 0;
    for (auto i : members) {
      pending[i].triple.ordinal = permutation ? *pending[i].number - 1 : next++;
    }
  }

  for (auto& p : pending) {
    result.triples.entries.push_back({std::move(p.triple), TripleCategory::Normal});
  }
  if (task == TaskKind::Nli3Way) {
    for (int g : {1, 2}) {
      if (result.triples.count_group(g) == 0) {
        throw Error(ErrorCode::MissingGroup,
                    "no triples for sent" + std::to_string(g));
      }
    }
  }
  return result;
}

std::string format_triple(const Triple& t) {
  check_slot(t.subject);
  check_slot(t.predicate);
  check_slot(t.object);
  return t.subject + " | " + t.predicate + " | " + t.object;
}

std::string serialize_triples(const TripleSet& ts, Numbering numbering) {
  std::string out;
  auto emit_group = [&](int group, bool nli) {
    int position = 0;
    for (const auto& e : ts.entries) {
      if (e.triple.group != group) continue;
      const int number =
          (numbering == Numbering::Original ? e.triple.ordinal : position) + 1;
      ++position;
      if (!out.empty() && out.back() != '\n') out.push_back('\n');
      if (nli) out += std::to_string(group) + "-";
      out += std::to_string(number) + ". " + format_triple(e.triple);
    }
  };
  if (ts.task == TaskKind::Nli3Way) {
    for (int g : {1, 2}) {
      if (ts.count_group(g) == 0) continue;
      if (!out.empty()) out += "\n\n";
      out += "sent" + std::to_string(g) + ":\n";
      emit_group(g, true);
    }
  } else {
    emit_group(1, false);
  }
  return out;
}

TripleSet categorize(const TripleSet& ts, const WordSets& ws) {
  TripleSet out = ts;
  for (auto& e : out.entries) {
    const auto& t = e.triple;
    bool spurious = false;
    bool principal = false;
    for (const auto* slot : {&t.subject, &t.predicate, &t.object}) {
      for (const auto& tok : tokenize(*slot)) {
        if (ws.spurious.count(tok)) spurious = true;
        if (ws.principal.count(tok)) principal = true;
      }
    }
    e.category = spurious    ? TripleCategory::Spurious
                 : principal ? TripleCategory::Principal
                             : TripleCategory::Normal;
  }
  return out;
}

}  // namespace coba
