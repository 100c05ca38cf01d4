#include "coba/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coba/error.hpp"
#include "coba/http_client.hpp"
#include "coba/rng.hpp"
#include "coba/tokenize.hpp"

namespace coba {

namespace {

using SparseRow = std::vector<std::pair<std::size_t, double>>;

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

SparseRow tfidf_row(std::string_view text,
                    const std::vector<std::string>& vocab,
                    const std::vector<double>& idf) {
  std::map<std::size_t, double> counts;
  for (const auto& tok : tokenize(text)) {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), tok);
    if (it != vocab.end() && *it == tok) {
      counts[static_cast<std::size_t>(it - vocab.begin())] += 1.0;
    }
  }
  SparseRow row;
  double norm = 0.0;
  for (auto [j, tf] : counts) {
    const double v = tf * idf[j];
    row.emplace_back(j, v);
    norm += v * v;
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& [j, v] : row) v /= norm;
  }
  return row;
}

std::vector<std::size_t> stratified_sample(const Dataset& ds, double fraction,
                                           std::uint64_t seed) {
  std::vector<std::size_t> chosen;
  if (fraction >= 1.0) {
    chosen.resize(ds.examples.size());
    std::iota(chosen.begin(), chosen.end(), 0);
    return chosen;
  }
  Rng rng(derive_seed(seed, "stratified-sample", 0));
  for (Label l : labels(ds.task)) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
      if (ds.examples[i].label == l) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(fraction * static_cast<double>(members.size()))));
    members.resize(std::min(take, members.size()));
    chosen.insert(chosen.end(), members.begin(), members.end());
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::string classifier_input(const Example& ex) {
  if (!ex.text2) return ex.text1;
  return ex.text1 + " [SEP] " + *ex.text2;
}

}  // namespace

std::string_view to_string(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::LocalNaiveBayes: return "local-nb";
    case ClassifierKind::LocalLogReg: return "local-logreg";
    case ClassifierKind::Remote: return "remote";
    case ClassifierKind::Callback: return "callback";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (auto k : {ClassifierKind::LocalNaiveBayes, ClassifierKind::LocalLogReg,
                 ClassifierKind::Remote}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown classifier kind '" + std::string(name) + "'");
}

ProbRow Classifier::predict_one(const std::string& text) const {
  return predict_proba(std::span<const std::string>(&text, 1)).front();
}

// ---------------------------------------------------------------------------

LocalClassifier::LocalClassifier(State state) : state_(std::move(state)) {
  const std::size_t c = labels(state_.task).size();
  if (state_.idf.size() != state_.vocabulary.size() ||
      state_.weights.size() != c * state_.vocabulary.size() ||
      state_.bias.size() != c) {
    throw Error(ErrorCode::InvalidArgument,
                "inconsistent model state for '" + state_.name + "'");
  }
}

std::vector<double> LocalClassifier::features(std::string_view text) const {
  std::vector<double> dense(state_.vocabulary.size(), 0.0);
  for (auto [j, v] : tfidf_row(text, state_.vocabulary, state_.idf)) dense[j] = v;
  return dense;
}

std::vector<ProbRow> LocalClassifier::predict_proba(
    std::span<const std::string> texts) const {
  if (texts.empty()) {
    throw Error(ErrorCode::InvalidArgument, "predict_proba on an empty batch");
  }
  const std::size_t c = state_.bias.size();
  const std::size_t v = state_.vocabulary.size();
  std::vector<ProbRow> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> z = state_.bias;
    for (auto [j, x] : tfidf_row(text, state_.vocabulary, state_.idf)) {
      for (std::size_t k = 0; k < c; ++k) z[k] += x * state_.weights[k * v + j];
    }
    softmax_inplace(z);
    out.push_back({std::move(z)});
  }
  return out;
}

std::string LocalClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = state_.name;
  j["task"] = to_string(state_.task);
  j["kind"] = to_string(state_.kind);
  j["vocabulary"] = state_.vocabulary;
  j["idf"] = state_.idf;
  j["weights"] = state_.weights;
  j["bias"] = state_.bias;
  return j.dump();
}

std::shared_ptr<LocalClassifier> LocalClassifier::from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    State s;
    s.name = j.at("name").get<std::string>();
    s.task = parse_task(j.at("task").get<std::string>());
    s.kind = parse_classifier_kind(j.at("kind").get<std::string>());
    if (s.kind == ClassifierKind::Remote) {
      throw Error(ErrorCode::InvalidArgument, "model file has remote kind");
    }
    s.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    s.idf = j.at("idf").get<std::vector<double>>();
    s.weights = j.at("weights").get<std::vector<double>>();
    s.bias = j.at("bias").get<std::vector<double>>();
    return std::make_shared<LocalClassifier>(std::move(s));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("malformed model file: ") + e.what());
  }
}

void LocalClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_json() << '\n';
}

std::shared_ptr<LocalClassifier> LocalClassifier::load(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::shared_ptr<LocalClassifier> train_local(const Dataset& dataset,
                                             std::string name,
                                             const TrainOptions& options) {
  if (options.kind != ClassifierKind::LocalNaiveBayes &&
      options.kind != ClassifierKind::LocalLogReg) {
    throw Error(ErrorCode::InvalidArgument, "train_local needs a local kind");
  }
  if (dataset.examples.empty()) {
    throw Error(ErrorCode::EmptyDataset, "cannot train on an empty dataset");
  }
  if (!(options.sample_fraction > 0.0 && options.sample_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample_fraction must be in (0, 1]");
  }
  const auto space = labels(dataset.task);
  for (Label l : space) {
    const bool present = std::any_of(
        dataset.examples.begin(), dataset.examples.end(),
        [&](const Example& ex) { return ex.label == l; });
    if (!present) {
      throw Error(ErrorCode::DegenerateData,
                  "label '" + std::string(to_string(l)) + "' has no examples");
    }
  }

  const auto chosen =
      stratified_sample(dataset, options.sample_fraction, options.seed);
  std::vector<std::string> inputs;
  std::vector<std::size_t> y;
  for (auto i : chosen) {
    inputs.push_back(classifier_input(dataset.examples[i]));
    y.push_back(label_index(dataset.task, dataset.examples[i].label));
  }

  LocalClassifier::State s;
  s.name = std::move(name);
  s.task = dataset.task;
  s.kind = options.kind;

  std::map<std::string, std::size_t> df;
  for (const auto& text : inputs) {
    auto toks = tokenize(text);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) ++df[t];
  }
  const double n_docs = static_cast<double>(inputs.size());
  for (const auto& [tok, count] : df) {
    s.vocabulary.push_back(tok);
    s.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
  }

  std::vector<SparseRow> rows;
  rows.reserve(inputs.size());
  for (const auto& text : inputs) rows.push_back(tfidf_row(text, s.vocabulary, s.idf));

  const std::size_t c = space.size();
  const std::size_t v = s.vocabulary.size();
  s.weights.assign(c * v, 0.0);
  s.bias.assign(c, 0.0);

  if (options.kind == ClassifierKind::LocalNaiveBayes) {
    std::vector<double> class_docs(c, 0.0);
    std::vector<double> feature_sum(c * v, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      class_docs[y[i]] += 1.0;
      for (auto [j, x] : rows[i]) feature_sum[y[i] * v + j] += x;
    }
    for (std::size_t k = 0; k < c; ++k) {
      s.bias[k] = std::log(class_docs[k] / n_docs);
      double total = 0.0;
      for (std::size_t j = 0; j < v; ++j) total += feature_sum[k * v + j];
      const double denom = total + options.smoothing * static_cast<double>(v);
      for (std::size_t j = 0; j < v; ++j) {
        s.weights[k * v + j] =
            std::log((feature_sum[k * v + j] + options.smoothing) / denom);
      }
    }
  } else {
    Rng rng(derive_seed(options.seed, "logreg-init", 0));
    for (auto& w : s.weights) w = (rng.uniform() - 0.5) * 0.02;
    std::vector<double> grad_w(c * v);
    std::vector<double> grad_b(c);
    std::vector<double> z(c);
    for (int it = 0; it < options.iterations; ++it) {
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        z = s.bias;
        for (auto [j, x] : rows[i]) {
          for (std::size_t k = 0; k < c; ++k) z[k] += x * s.weights[k * v + j];
        }
        softmax_inplace(z);
        for (std::size_t k = 0; k < c; ++k) {
          const double err = z[k] - (y[i] == k ? 1.0 : 0.0);
          grad_b[k] += err;
          for (auto [j, x] : rows[i]) grad_w[k * v + j] += err * x;
        }
      }
      for (std::size_t idx = 0; idx < grad_w.size(); ++idx) {
        s.weights[idx] -= options.learning_rate *
                          (grad_w[idx] / n_docs + options.l2 * s.weights[idx]);
      }
      for (std::size_t k = 0; k < c; ++k) {
        s.bias[k] -= options.learning_rate * grad_b[k] / n_docs;
      }
    }
  }
  return std::make_shared<LocalClassifier>(std::move(s));
}

// ---------------------------------------------------------------------------

CallbackClassifier::CallbackClassifier(std::string name, TaskKind task, Fn fn)
    : name_(std::move(name)), task_(task), fn_(std::move(fn)) {}

std::vector<ProbRow> CallbackClassifier::predict_proba(
    std::span<const std::string> texts) const {
  if (texts.empty()) {
    throw Error(ErrorCode::InvalidArgument, "predict_proba on an empty batch");
  }
  std::vector<ProbRow> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back({fn_(t)});
  return out;
}

// ---------------------------------------------------------------------------

RemoteClassifier::RemoteClassifier(std::string name, TaskKind task,
                                   RemoteOptions options)
    : name_(std::move(name)), task_(task), options_(std::move(options)) {
  if (options_.endpoint.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "remote classifier '" + name_ + "' needs an endpoint");
  }
  if (options_.model.empty()) options_.model = name_;
  HttpOptions http;
  http.max_in_flight = options_.max_in_flight;
  http.attempts = options_.attempts;
  http.timeout_seconds = options_.timeout_seconds;
  http_ = std::make_unique<HttpClient>(options_.endpoint, http);
}

RemoteClassifier::~RemoteClassifier() = default;

std::vector<ProbRow> RemoteClassifier::predict_proba(
    std::span<const std::string> texts) const {
  if (texts.empty()) {
    throw Error(ErrorCode::InvalidArgument, "predict_proba on an empty batch");
  }
  nlohmann::json req;
  req["model"] = options_.model;
  req["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  const auto resp = http_->post("/predict", req);
  if (resp.status != 200) {
    throw Error(ErrorCode::BackendUnavailable,
                "/predict returned HTTP " + std::to_string(resp.status));
  }
  const auto j = parse_json_reply(resp, "/predict");
  const auto probs = j.find("probs");
  if (probs == j.end() || !probs->is_array()) {
    throw Error(ErrorCode::ShapeMismatch, "/predict reply has no 'probs' array");
  }
  if (probs->size() != texts.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "/predict returned " + std::to_string(probs->size()) +
                    " rows for " + std::to_string(texts.size()) + " texts");
  }
  const std::size_t width = labels(task_).size();
  std::vector<ProbRow> out;
  for (const auto& row : *probs) {
    if (!row.is_array() || row.size() != width) {
      throw Error(ErrorCode::ShapeMismatch, "/predict row has the wrong width");
    }
    ProbRow pr;
    double sum = 0.0;
    for (const auto& v : row) {
      if (!v.is_number()) throw Error(ErrorCode::ShapeMismatch, "non-numeric probability");
      const double p = v.get<double>();
      if (!std::isfinite(p) || p < -1e-9 || p > 1.0 + 1e-9) {
        throw Error(ErrorCode::ShapeMismatch, "probability outside [0, 1]");
      }
      pr.probs.push_back(std::clamp(p, 0.0, 1.0));
      sum += pr.probs.back();
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::ShapeMismatch, "probability row does not sum to 1");
    }
    for (double& p : pr.probs) p /= sum;
    out.push_back(std::move(pr));
  }
  return out;
}

std::vector<ServedModel> RemoteClassifier::models() const {
  const auto resp = http_->get("/models");
  if (resp.status != 200) {
    throw Error(ErrorCode::BackendUnavailable,
                "/models returned HTTP " + std::to_string(resp.status));
  }
  const auto j = parse_json_reply(resp, "/models");
  std::vector<ServedModel> out;
  try {
    for (const auto& m : j) {
      ServedModel sm;
      sm.name = m.at("name").get<std::string>();
      sm.task = m.value("task", "");
      sm.capabilities = m.value("capabilities", std::vector<std::string>{});
      out.push_back(std::move(sm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable,
                std::string("/models reply malformed: ") + e.what());
  }
  return out;
}

AttributionReply RemoteClassifier::attributions(const std::string& text,
                                                const std::string& method,
                                                std::optional<int> steps) const {
  nlohmann::json req;
  req["model"] = options_.model;
  req["text"] = text;
  req["method"] = method;
  if (steps) req["steps"] = *steps;
  const auto resp = http_->post("/attributions", req);
  if (resp.status == 422) {
    throw Error(ErrorCode::UnsupportedMethod,
                "server rejected attribution method '" + method + "'");
  }
  if (resp.status != 200) {
    throw Error(ErrorCode::BackendUnavailable,
                "/attributions returned HTTP " + std::to_string(resp.status));
  }
  const auto j = parse_json_reply(resp, "/attributions");
  AttributionReply out;
  try {
    out.tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const auto& span : j.at("spans")) {
      if (!span.is_array() || span.size() != 2) {
        throw Error(ErrorCode::AlignmentFailure, "span is not a pair");
      }
      out.spans.emplace_back(span[0].get<std::size_t>(), span[1].get<std::size_t>());
    }
    out.scores = j.at("scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::AlignmentFailure,
                std::string("/attributions reply malformed: ") + e.what());
  }
  return out;
}

}  // namespace coba
