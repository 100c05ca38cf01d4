#include "coba/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "coba/error.hpp"
#include "coba/rng.hpp"
#include "coba/tokenize.hpp"

namespace coba {

namespace {

constexpr std::array<Label, 2> kSentimentLabels = {Label::Positive,
                                                   Label::Negative};
constexpr std::array<Label, 3> kNliLabels = {
    Label::Entailment, Label::Neutral, Label::Contradiction};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == content.size()) break;
    start = end + 1;
  }
  return lines;
}

Label require_label(std::string_view raw, TaskKind task, std::size_t line) {
  auto label = parse_label(trim(raw));
  if (!label || !in_label_space(task, *label)) {
    throw Error(ErrorCode::MalformedRecord,
                "label '" + std::string(raw) + "' not in " +
                    std::string(to_string(task)) + " label space",
                line);
  }
  return *label;
}

Example parse_jsonl_line(std::string_view line, TaskKind task,
                         std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, e.what(), line_no);
  }
  auto string_field = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
      throw Error(ErrorCode::MalformedRecord,
                  std::string("field '") + key + "' is not a string", line_no);
    }
    return it->get<std::string>();
  };
  if (!j.is_object()) {
    throw Error(ErrorCode::MalformedRecord, "record is not an object", line_no);
  }
  Example ex;
  auto text = string_field("text");
  auto label = string_field("label");
  if (!text) throw Error(ErrorCode::MalformedRecord, "missing 'text'", line_no);
  if (!label) throw Error(ErrorCode::MalformedRecord, "missing 'label'", line_no);
  ex.text1 = *text;
  ex.text2 = string_field("text2");
  ex.label = require_label(*label, task, line_no);
  if (auto id = string_field("id")) ex.id = *id;
  return ex;
}

Example parse_tsv_line(std::string_view line, TaskKind task,
                       std::size_t line_no) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string_view::npos
                                          ? std::string_view::npos
                                          : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  const std::size_t expected = task == TaskKind::Nli3Way ? 3 : 2;
  if (cols.size() != expected) {
    throw Error(ErrorCode::MalformedRecord,
                "expected " + std::to_string(expected) + " columns, got " +
                    std::to_string(cols.size()),
                line_no);
  }
  Example ex;
  ex.text1 = std::string(cols[0]);
  if (task == TaskKind::Nli3Way) ex.text2 = std::string(cols[1]);
  ex.label = require_label(cols.back(), task, line_no);
  return ex;
}

}  // namespace

std::string_view to_string(TaskKind task) noexcept {
  return task == TaskKind::Nli3Way ? "nli-3way" : "sentiment-binary";
}

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::Positive: return "positive";
    case Label::Negative: return "negative";
    case Label::Entailment: return "entailment";
    case Label::Neutral: return "neutral";
    case Label::Contradiction: return "contradiction";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  if (name == "sentiment-binary" || name == "sentiment") {
    return TaskKind::SentimentBinary;
  }
  if (name == "nli-3way" || name == "nli") return TaskKind::Nli3Way;
  throw Error(ErrorCode::InvalidArgument, "unknown task '" + std::string(name) + "'");
}

std::optional<Label> parse_label(std::string_view name) noexcept {
  for (Label l : {Label::Positive, Label::Negative, Label::Entailment,
                  Label::Neutral, Label::Contradiction}) {
    if (to_string(l) == name) return l;
  }
  return std::nullopt;
}

std::span<const Label> labels(TaskKind task) noexcept {
  if (task == TaskKind::Nli3Way) return kNliLabels;
  return kSentimentLabels;
}

bool in_label_space(TaskKind task, Label label) noexcept {
  auto space = labels(task);
  return std::find(space.begin(), space.end(), label) != space.end();
}

std::size_t label_index(TaskKind task, Label label) {
  auto space = labels(task);
  auto it = std::find(space.begin(), space.end(), label);
  if (it == space.end()) {
    throw Error(ErrorCode::UnknownLabel,
                std::string(to_string(label)) + " not in " +
                    std::string(to_string(task)));
  }
  return static_cast<std::size_t>(it - space.begin());
}

DataFormat parse_format(std::string_view name) {
  if (name == "jsonl" || name == "json") return DataFormat::Jsonl;
  if (name == "tsv") return DataFormat::Tsv;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + std::string(name) + "'");
}

DataFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".tsv" || ext == ".txt") return DataFormat::Tsv;
  return DataFormat::Jsonl;
}

void validate_example(const Example& ex, TaskKind task) {
  if (trim(ex.text1).empty()) {
    throw Error(ErrorCode::InvalidArgument, "example '" + ex.id + "' has empty text");
  }
  if ((task == TaskKind::Nli3Way) != ex.text2.has_value()) {
    throw Error(ErrorCode::InvalidArgument,
                "example '" + ex.id + "': text2 must be present exactly for nli-3way");
  }
  if (!in_label_space(task, ex.label)) {
    throw Error(ErrorCode::InvalidArgument,
                "example '" + ex.id + "': label outside task label space");
  }
}

Dataset parse_dataset(std::string_view content, DataFormat format,
                      TaskKind task, LoadOptions options) {
  Dataset ds;
  ds.task = task;
  std::unordered_set<std::string> ids;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (format == DataFormat::Tsv && options.header && i == 0) continue;
    if (trim(lines[i]).empty()) continue;
    Example ex = format == DataFormat::Jsonl
                     ? parse_jsonl_line(lines[i], task, line_no)
                     : parse_tsv_line(lines[i], task, line_no);
    if (trim(ex.text1).empty()) {
      throw Error(ErrorCode::MalformedRecord, "empty text", line_no);
    }
    if ((task == TaskKind::Nli3Way) != ex.text2.has_value()) {
      throw Error(ErrorCode::MalformedRecord,
                  task == TaskKind::Nli3Way ? "missing 'text2'"
                                            : "unexpected 'text2'",
                  line_no);
    }
    if (ex.id.empty()) ex.id = "row-" + std::to_string(ds.examples.size() + 1);
    if (!ids.insert(ex.id).second) {
      throw Error(ErrorCode::MalformedRecord, "duplicate id '" + ex.id + "'",
                  line_no);
    }
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no records");
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     TaskKind task, LoadOptions options) {
  return parse_dataset(read_file(path), format, task, options);
}

std::string serialize_dataset(const Dataset& ds, DataFormat format) {
  std::string out;
  for (const auto& ex : ds.examples) {
    if (format == DataFormat::Jsonl) {
      nlohmann::ordered_json j;
      j["id"] = ex.id;
      j["text"] = ex.text1;
      if (ex.text2) j["text2"] = *ex.text2;
      j["label"] = to_string(ex.label);
      out += j.dump();
    } else {
      auto check = [&](const std::string& field) {
        if (field.find_first_of("\t\n\r") != std::string::npos) {
          throw Error(ErrorCode::InvalidArgument,
                      "example '" + ex.id + "' contains a tab or newline; "
                      "cannot write TSV");
        }
      };
      check(ex.text1);
      out += ex.text1;
      if (ex.text2) {
        check(*ex.text2);
        out += '\t';
        out += *ex.text2;
      }
      out += '\t';
      out += to_string(ex.label);
    }
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path,
                  DataFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << serialize_dataset(ds, format);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double fraction,
                                          std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "split fraction must be in [0, 1]");
  }
  std::vector<std::size_t> idx(ds.examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  const auto n_first = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(idx.size())));
  std::vector<bool> in_first(idx.size(), false);
  for (std::size_t i = 0; i < n_first; ++i) in_first[idx[i]] = true;
  Dataset a{ds.task, {}}, b{ds.task, {}};
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    (in_first[i] ? a : b).examples.push_back(ds.examples[i]);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace coba
