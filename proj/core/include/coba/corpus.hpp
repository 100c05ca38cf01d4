#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coba {

enum class TaskKind { SentimentBinary, Nli3Way };

enum class Label { Positive, Negative, Entailment, Neutral, Contradiction };

std::string_view to_string(TaskKind task) noexcept;
std::string_view to_string(Label label) noexcept;
TaskKind parse_task(std::string_view name);
std::optional<Label> parse_label(std::string_view name) noexcept;

/// Label space in model output order.
std::span<const Label> labels(TaskKind task) noexcept;
bool in_label_space(TaskKind task, Label label) noexcept;
/// Position of `label` in `labels(task)`. Throws UnknownLabel if absent.
std::size_t label_index(TaskKind task, Label label);

struct Example {
  std::string id;
  std::string text1;
  std::optional<std::string> text2;
  Label label = Label::Positive;

  bool operator==(const Example&) const = default;
};

struct Dataset {
  TaskKind task = TaskKind::SentimentBinary;
  std::vector<Example> examples;
};

enum class DataFormat { Jsonl, Tsv };

DataFormat parse_format(std::string_view name);
/// Infers the format from the file extension (.jsonl/.json, .tsv/.txt).
DataFormat format_from_path(const std::filesystem::path& path);

struct LoadOptions {
  /// TSV only: skip the first line.
  bool header = false;
};

Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     TaskKind task, LoadOptions options = {});
Dataset parse_dataset(std::string_view content, DataFormat format,
                      TaskKind task, LoadOptions options = {});

/// Writes examples in the given format. Loading the result yields the same
/// Dataset for well-formed input.
std::string serialize_dataset(const Dataset& ds, DataFormat format);
void save_dataset(const Dataset& ds, const std::filesystem::path& path,
                  DataFormat format);

/// Throws InvalidArgument if the example does not conform to the task.
void validate_example(const Example& example, TaskKind task);

/// Deterministic seeded split into (first, second) with round(fraction * n)
/// examples in `first`.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double fraction,
                                          std::uint64_t seed);

}  // namespace coba
