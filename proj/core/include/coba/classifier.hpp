#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coba/corpus.hpp"

namespace coba {

class HttpClient;

enum class ClassifierKind { LocalNaiveBayes, LocalLogReg, Remote, Callback };

std::string_view to_string(ClassifierKind kind) noexcept;
ClassifierKind parse_classifier_kind(std::string_view name);

/// Class probabilities indexed by `labels(task)`.
struct ProbRow {
  std::vector<double> probs;
};

/// Black-box classifier. Implementations must be safe to call concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual const std::string& name() const noexcept = 0;
  virtual TaskKind task() const noexcept = 0;
  virtual ClassifierKind kind() const noexcept = 0;

  /// One row per input text, in input order. Throws InvalidArgument on an
  /// empty batch.
  virtual std::vector<ProbRow> predict_proba(
      std::span<const std::string> texts) const = 0;

  ProbRow predict_one(const std::string& text) const;
};

using ClassifierHandle = std::shared_ptr<const Classifier>;

struct TrainOptions {
  ClassifierKind kind = ClassifierKind::LocalLogReg;
  std::uint64_t seed = 0;
  /// Stratified fraction of each label's examples used for fitting. 1.0 uses
  /// the full dataset; smaller values give ensemble members distinct views.
  double sample_fraction = 1.0;
  // Logistic regression only.
  int iterations = 500;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  // Naive Bayes only.
  double smoothing = 1.0;
};

/// Linear softmax model over L2-normalised TF-IDF features of canonical
/// tokens. Naive Bayes is stored as log-prior bias plus log-likelihood
/// weights; logistic regression as fitted weights.
class LocalClassifier final : public Classifier {
 public:
  struct State {
    std::string name;
    TaskKind task = TaskKind::SentimentBinary;
    ClassifierKind kind = ClassifierKind::LocalLogReg;
    std::vector<std::string> vocabulary;  // sorted
    std::vector<double> idf;
    /// labels × vocabulary, row-major.
    std::vector<double> weights;
    std::vector<double> bias;
  };

  explicit LocalClassifier(State state);

  const std::string& name() const noexcept override { return state_.name; }
  TaskKind task() const noexcept override { return state_.task; }
  ClassifierKind kind() const noexcept override { return state_.kind; }

  std::vector<ProbRow> predict_proba(
      std::span<const std::string> texts) const override;

  const State& state() const noexcept { return state_; }

  /// Canonical JSON encoding; identical training runs produce identical
  /// strings.
  std::string to_json() const;
  static std::shared_ptr<LocalClassifier> from_json(std::string_view json);

  void save(const std::filesystem::path& path) const;
  static std::shared_ptr<LocalClassifier> load(
      const std::filesystem::path& path);

 private:
  std::vector<double> features(std::string_view text) const;

  State state_;
};

/// Fits a local classifier. Throws DegenerateData when a label of the task
/// has no examples, EmptyDataset when the dataset is empty.
std::shared_ptr<LocalClassifier> train_local(const Dataset& dataset,
                                             std::string name,
                                             const TrainOptions& options);

/// Wraps a function of the input text. Used for synthetic models in tests
/// and for composing classifiers in-process.
class CallbackClassifier final : public Classifier {
 public:
  using Fn = std::function<std::vector<double>(const std::string&)>;

  CallbackClassifier(std::string name, TaskKind task, Fn fn);

  const std::string& name() const noexcept override { return name_; }
  TaskKind task() const noexcept override { return task_; }
  ClassifierKind kind() const noexcept override {
    return ClassifierKind::Callback;
  }

  std::vector<ProbRow> predict_proba(
      std::span<const std::string> texts) const override;

 private:
  std::string name_;
  TaskKind task_;
  Fn fn_;
};

struct ServedModel {
  std::string name;
  std::string task;
  std::vector<std::string> capabilities;
};

struct AttributionReply {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::vector<double> scores;
};

struct RemoteOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::string model;     // served model name; defaults to the handle name
  int max_in_flight = 4;
  int attempts = 3;
  double timeout_seconds = 30.0;
};

/// Client for the model-server protocol: POST /predict, POST /attributions,
/// GET /models.
class RemoteClassifier final : public Classifier {
 public:
  RemoteClassifier(std::string name, TaskKind task, RemoteOptions options);
  ~RemoteClassifier() override;

  const std::string& name() const noexcept override { return name_; }
  TaskKind task() const noexcept override { return task_; }
  ClassifierKind kind() const noexcept override {
    return ClassifierKind::Remote;
  }
  const std::string& endpoint() const noexcept { return options_.endpoint; }
  const std::string& model() const noexcept { return options_.model; }

  /// Throws BackendUnavailable on transport failure and ShapeMismatch when
  /// the reply does not have one valid row per text.
  std::vector<ProbRow> predict_proba(
      std::span<const std::string> texts) const override;

  std::vector<ServedModel> models() const;
  AttributionReply attributions(const std::string& text,
                                const std::string& method,
                                std::optional<int> steps) const;

 private:
  std::string name_;
  TaskKind task_;
  RemoteOptions options_;
  std::unique_ptr<HttpClient> http_;
};

}  // namespace coba
