#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coba/augment.hpp"
#include "coba/classifier.hpp"
#include "coba/corpus.hpp"
#include "coba/cost.hpp"
#include "coba/importance.hpp"
#include "coba/llm.hpp"

namespace coba::cli {

/// A parsed `[section]` / `key = value` file. Values are strings, numbers,
/// booleans or arrays of strings; `${NAME}` inside strings expands from the
/// environment.
class ConfigFile {
 public:
  using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

  static ConfigFile parse(std::string_view content);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(std::string_view section, std::string_view key) const;
  std::optional<std::string> get_string(std::string_view section, std::string_view key) const;
  std::optional<double> get_number(std::string_view section, std::string_view key) const;
  std::optional<std::int64_t> get_int(std::string_view section, std::string_view key) const;
  std::optional<bool> get_bool(std::string_view section, std::string_view key) const;
  std::optional<std::vector<std::string>> get_list(std::string_view section,
                                                   std::string_view key) const;

  /// Keys in `section` not present in `known`.
  std::vector<std::string> unknown_keys(std::string_view section,
                                        const std::vector<std::string>& known) const;
  std::vector<std::string> sections() const;

 private:
  const Value* find(std::string_view section, std::string_view key) const;

  std::map<std::string, std::map<std::string, Value>, std::less<>> values_;
};

struct ClassifierSettings {
  /// local-nb, local-logreg or remote, cycled over `count` members.
  std::vector<ClassifierKind> kinds = {ClassifierKind::LocalNaiveBayes,
                                       ClassifierKind::LocalLogReg};
  int count = 5;
  double sample_fraction = 1.0;
  std::optional<std::filesystem::path> train_path;
  std::filesystem::path model_dir;
  std::string endpoint;
  std::vector<std::string> remote_models;
};

struct LlmSettings {
  std::string backend = "mock";  // mock | chat
  ChatBackendOptions chat;
  std::optional<std::filesystem::path> mock_lexicon_dir;
  std::optional<int> max_tokens;
};

struct CostSettings {
  std::optional<std::int64_t> n_examples;
  std::optional<std::int64_t> avg_chars;
  Rates rates;
  double expected_principal_triples = 1.0;
};

struct RunConfig {
  std::filesystem::path dataset;
  DataFormat format = DataFormat::Jsonl;
  TaskKind task = TaskKind::SentimentBinary;
  LoadOptions load;
  AugmentationConfig augment;
  ImportanceConfig importance;
  ClassifierSettings classifier;
  LlmSettings llm;
  CostSettings cost;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  int workers = 1;
};

/// Builds a RunConfig. Relative paths resolve against the config file's
/// directory. Throws Error(Config) on unknown keys, bad values or missing
/// required entries.
RunConfig run_config_from(const ConfigFile& file, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws Error(Config) when referenced input paths are missing.
void check_paths(const RunConfig& cfg);

}  // namespace coba::cli
