#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "coba/analysis.hpp"
#include "coba/error.hpp"
#include "coba/http_client.hpp"
#include "coba/tokenize.hpp"

namespace coba::cli {

namespace {

using json = nlohmann::ordered_json;

/// Input problems map to the configuration exit code.
bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Io:
    case ErrorCode::MalformedRecord:
    case ErrorCode::EmptyDataset:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownLabel:
    case ErrorCode::AsymmetricLexicon:
    case ErrorCode::InconsistentModels:
    case ErrorCode::EmptyWordList:
    case ErrorCode::InvalidK:
    case ErrorCode::EvenEnsembleWithoutTau:
      return true;
    default:
      return false;
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string extension(DataFormat f) { return f == DataFormat::Jsonl ? ".jsonl" : ".tsv"; }

struct Overrides {
  std::optional<double> p_delete;
  std::optional<int> k;
  std::optional<int> n_variants;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
  auto cfg = load_run_config(path);
  if (o.p_delete) cfg.augment.p_delete = *o.p_delete;
  if (o.k) cfg.augment.k = *o.k;
  if (o.n_variants) cfg.augment.n_variants = *o.n_variants;
  if (o.seed) cfg.augment.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (cfg.workers < 1) throw Error(ErrorCode::Config, "--workers must be >= 1");
  try {
    cfg.augment.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  check_paths(cfg);
  return cfg;
}

Dataset load_corpus(const std::filesystem::path& path, const RunConfig& cfg) {
  return load_dataset(path, format_from_path(path) == cfg.format ? cfg.format : format_from_path(path),
                      cfg.task, cfg.load);
}

std::filesystem::path model_path(const RunConfig& cfg, int i) {
  return cfg.classifier.model_dir / ("model-" + std::to_string(i) + ".json");
}

ClassifierKind kind_at(const RunConfig& cfg, int i) {
  const auto& kinds = cfg.classifier.kinds;
  return kinds[static_cast<std::size_t>(i) % kinds.size()];
}

std::shared_ptr<LocalClassifier> train_member(const RunConfig& cfg, const Dataset& train, int i) {
  TrainOptions opts;
  opts.kind = kind_at(cfg, i);
  opts.seed = derive_seed(cfg.augment.seed, "classifier", static_cast<std::uint64_t>(i));
  opts.sample_fraction = cfg.classifier.sample_fraction;
  const std::string name = std::string(to_string(opts.kind)) + "-" + std::to_string(i);
  return train_local(train, name, opts);
}

Dataset training_set(const RunConfig& cfg, const Dataset& corpus) {
  if (!cfg.classifier.train_path) return corpus;
  return load_corpus(*cfg.classifier.train_path, cfg);
}

std::unique_ptr<LlmBackend> make_backend(const RunConfig& cfg) {
  if (cfg.llm.backend == "chat") return std::make_unique<ChatCompletionBackend>(cfg.llm.chat);
  auto lex = cfg.llm.mock_lexicon_dir ? load_mock_lexicons(*cfg.llm.mock_lexicon_dir)
                                      : default_mock_lexicons();
  return std::make_unique<MockBackend>(std::move(lex));
}

json summary_json(const AugmentSummary& s) {
  json j;
  j["examples"] = s.examples;
  j["succeeded"] = s.succeeded;
  j["skipped"] = s.skipped;
  j["records"] = s.records;
  j["no_principal_warnings"] = s.no_principal_warnings;
  j["unparsed_lines"] = s.unparsed_lines;
  j["spurious_word_retention"] = s.spurious_word_retention;
  j["verified"] = {{"agree", s.verified_true}, {"total", s.verified_total}};
  j["failures"] = s.failures;
  return j;
}

json llm_json(const LlmStats& st, const Rates& rates) {
  const auto cost = cost_of(st.billed, rates);
  json j;
  j["requests"] = st.requests;
  j["cache_hits"] = st.cache_hits;
  j["backend_calls"] = st.backend_calls;
  j["cache_hit_rate"] = st.requests ? static_cast<double>(st.cache_hits) / static_cast<double>(st.requests) : 0.0;
  j["cost"] = {{"input_tokens", cost.input_tokens},
               {"output_tokens", cost.output_tokens},
               {"usd", cost.usd},
               {"approximate", true}};
  return j;
}

std::string topk_jsonl(const std::vector<std::pair<std::string, std::vector<TopKWords>>>& top_k) {
  std::string out;
  for (const auto& [id, lists] : top_k) {
    json j;
    j["id"] = id;
    j["lists"] = json::array();
    for (const auto& l : lists) j["lists"].push_back({{"model", l.model_name}, {"words", l.words}});
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<ExampleTopK> read_topk(const std::filesystem::path& path) {
  std::vector<ExampleTopK> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ExampleTopK ex;
      ex.example_id = j.at("id").get<std::string>();
      for (const auto& l : j.at("lists")) {
        ex.lists.push_back({l.at("model").get<std::string>(), l.at("words").get<std::vector<std::string>>()});
      }
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, std::string("bad top-k line: ") + e.what(), line_no);
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyDataset, "no top-k records in " + path.string());
  return out;
}

struct TextRow {
  std::string key;
  std::optional<std::string> source_id;
  std::string text;
};

/// Rows of a dataset or record file for embedding. JSONL rows may carry
/// "source_id" (counterbias records) or "id".
std::vector<TextRow> read_texts(const std::filesystem::path& path, TaskKind task) {
  std::vector<TextRow> rows;
  if (format_from_path(path) == DataFormat::Tsv) {
    for (const auto& ex : load_dataset(path, DataFormat::Tsv, task).examples) {
      rows.push_back({ex.id, std::nullopt, ex.text1 + (ex.text2 ? " " + *ex.text2 : "")});
    }
    return rows;
  }
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TextRow r;
      r.text = j.at("text").get<std::string>();
      if (j.contains("text2")) r.text += " " + j["text2"].get<std::string>();
      if (j.contains("source_id")) r.source_id = j["source_id"].get<std::string>();
      r.key = j.contains("id") ? j["id"].get<std::string>() : "row-" + std::to_string(rows.size() + 1);
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, e.what(), line_no);
    }
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no rows in " + path.string());
  return rows;
}

void emit(std::ostream& out, const nlohmann::json& report, const std::string& table, bool as_table,
          const std::string& out_path) {
  if (!out_path.empty()) write_file(out_path, report.dump(2) + "\n");
  if (as_table) {
    out << table;
  } else {
    out << report.dump(2) << "\n";
  }
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_train(const std::string& config, const Overrides& o, std::ostream& out) {
  const auto cfg = load_with_overrides(config, o);
  const auto corpus = load_corpus(cfg.dataset, cfg);
  const auto train = training_set(cfg, corpus);
  json summary;
  summary["command"] = "train-classifiers";
  summary["models"] = json::array();
  for (int i = 0; i < cfg.classifier.count; ++i) {
    if (kind_at(cfg, i) == ClassifierKind::Remote) {
      throw Error(ErrorCode::Config, "remote classifiers are trained by the model server");
    }
    const auto model = train_member(cfg, train, i);
    const auto path = model_path(cfg, i);
    std::filesystem::create_directories(path.parent_path());
    model->save(path);
    std::size_t correct = 0;
    for (const auto& ex : train.examples) {
      const auto row = model->predict_one(ex.text2 ? ex.text1 + std::string(ScoringView::kSeparator) + *ex.text2 : ex.text1);
      const auto best = static_cast<std::size_t>(std::max_element(row.probs.begin(), row.probs.end()) - row.probs.begin());
      correct += best == label_index(cfg.task, ex.label);
    }
    summary["models"].push_back({{"name", model->name()},
                                 {"kind", to_string(model->kind())},
                                 {"path", path.string()},
                                 {"train_accuracy", static_cast<double>(correct) / static_cast<double>(train.examples.size())}});
  }
  summary["exit_code"] = kExitOk;
  write_file(cfg.output_dir / "train_summary.json", summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_augment(const std::string& config, const Overrides& o, std::ostream& out) {
  const auto cfg = load_with_overrides(config, o);
  const auto corpus = load_corpus(cfg.dataset, cfg);

  const auto summary_path = cfg.output_dir / "summary.json";
  json summary;
  summary["command"] = "augment";
  summary["config"] = std::filesystem::absolute(config).string();
  std::shared_ptr<CachedBackend> backend;
  auto finish = [&](int code, const std::string& error) {
    summary["exit_code"] = code;
    summary["status"] = code == kExitOk ? "ok" : "failed";
    if (!error.empty()) summary["error"] = error;
    if (backend) summary["llm"] = llm_json(backend->stats(), cfg.cost.rates);
    write_file(summary_path, summary.dump(2) + "\n");
    out << summary.dump(2) << "\n";
    return code;
  };

  try {
    AugmentDeps deps;
    deps.ensemble = build_ensemble(cfg, corpus);
    deps.importance = cfg.importance;
    load_lexicons(cfg.augment, deps);
    auto cache = std::make_shared<ResponseCache>(cfg.cache_dir / "llm-cache.bin");
    backend = std::make_shared<CachedBackend>(make_backend(cfg), cache);
    deps.backend = backend.get();
    deps.prompts = default_prompts(cfg.task);
    for (auto* p : {&deps.ext_params, &deps.mod_params, &deps.rec_params}) {
      p->seed = cfg.augment.seed;
      if (cfg.llm.max_tokens) p->max_tokens = *cfg.llm.max_tokens;
    }

    const auto result = augment_dataset(corpus, deps, cfg.augment, cfg.workers);
    const auto records_path = cfg.output_dir / "counterbias.jsonl";
    const auto merged_path = cfg.output_dir / ("merged" + extension(cfg.format));
    const auto topk_path = cfg.output_dir / "topk.jsonl";
    write_file(records_path, records_to_jsonl(result.records, cfg.task));
    write_file(merged_path, serialize_dataset(merge_dataset(corpus, result.records), cfg.format));
    write_file(topk_path, topk_jsonl(result.top_k));
    summary["counts"] = summary_json(result.summary);
    summary["outputs"] = {{"records", records_path.string()},
                          {"merged", merged_path.string()},
                          {"top_k", topk_path.string()}};
    return finish(kExitOk, "");
  } catch (const Error& e) {
    const int code = e.code() == ErrorCode::Config ? kExitConfig : kExitRuntime;
    return finish(code, std::string(to_string(e.code())) + ": " + e.what());
  } catch (const std::exception& e) {
    return finish(kExitRuntime, e.what());
  }
}

int cmd_estimate(const std::string& config, const Overrides& o, std::ostream& out) {
  const auto cfg = load_with_overrides(config, o);
  std::int64_t n = 0;
  std::int64_t avg = 0;
  if (cfg.cost.n_examples && cfg.cost.avg_chars) {
    n = *cfg.cost.n_examples;
    avg = *cfg.cost.avg_chars;
  } else {
    const auto corpus = load_corpus(cfg.dataset, cfg);
    std::size_t chars = 0;
    for (const auto& ex : corpus.examples) {
      chars += char_length(ex.text1) + (ex.text2 ? char_length(*ex.text2) : 0);
    }
    n = cfg.cost.n_examples.value_or(static_cast<std::int64_t>(corpus.examples.size()));
    avg = cfg.cost.avg_chars.value_or(static_cast<std::int64_t>(
        (chars + corpus.examples.size() / 2) / corpus.examples.size()));
  }
  if (n < 0 || avg < 0) throw Error(ErrorCode::Config, "[cost] values must be >= 0");
  CostModel model;
  model.task = cfg.task;
  model.n_variants = cfg.augment.n_variants;
  model.expected_principal_triples = cfg.cost.expected_principal_triples;
  const auto est = estimate_cost(n, avg, cfg.cost.rates, model);
  json j;
  j["command"] = "estimate-cost";
  j["n_examples"] = n;
  j["avg_chars"] = avg;
  j["n_variants"] = model.n_variants;
  j["expected_principal_triples"] = model.expected_principal_triples;
  j["rates_per_million"] = {{"input", cfg.cost.rates.input_per_million},
                            {"output", cfg.cost.rates.output_per_million}};
  j["input_tokens"] = est.input_tokens;
  j["output_tokens"] = est.output_tokens;
  j["usd"] = est.usd;
  j["approximate"] = true;
  j["exit_code"] = kExitOk;
  write_file(cfg.output_dir / "cost_estimate.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_overlap(const std::string& input, bool table, const std::string& out_path, std::ostream& out) {
  const auto report = duplication_ratio(read_topk(input));
  const auto rows = std::vector<std::vector<std::string>>{
      {"all models", fmt(report.all_models_ratio)},
      {">= 2 models", fmt(report.two_or_more_ratio)},
      {">= 2 models, not all", fmt(report.two_or_more_not_all_ratio)},
      {"examples", std::to_string(report.n_examples)}};
  emit(out, to_json(report), format_table({"overlap", "ratio"}, rows), table, out_path);
  return kExitOk;
}

int cmd_pos(const std::string& input, const std::string& tags, const std::string& tagger_name,
            bool table, const std::string& out_path, std::ostream& out) {
  std::vector<std::string> words;
  if (format_from_path(input) == DataFormat::Jsonl) {
    for (const auto& ex : read_topk(input)) {
      for (const auto& l : ex.lists) words.insert(words.end(), l.words.begin(), l.words.end());
    }
  } else {
    std::istringstream in(read_file(input));
    std::string w;
    while (in >> w) words.push_back(w);
  }
  std::shared_ptr<const Tagger> tagger;
  if (tagger_name == "heuristic") {
    tagger = std::make_shared<HeuristicTagger>();
  } else {
    bool found = false;
    for (auto b : kPosBuckets) {
      if (to_lower(to_string(b)) == to_lower(tagger_name)) {
        tagger = std::make_shared<ConstantTagger>(b);
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::InvalidArgument, "unknown tagger '" + tagger_name + "'");
  }
  if (!tags.empty()) tagger = TagFileTagger::load(tags, tagger);
  const auto report = pos_ratio(words, *tagger);
  std::vector<std::vector<std::string>> rows;
  for (auto b : kPosBuckets) {
    rows.push_back({std::string(to_string(b)), std::to_string(report.counts.at(b)), fmt(report.ratios.at(b))});
  }
  emit(out, to_json(report), format_table({"bucket", "count", "ratio"}, rows), table, out_path);
  return kExitOk;
}

int cmd_diversity(const std::string& original_path, const std::string& augmented_path,
                  const std::string& task_name, int components, const std::string& endpoint,
                  bool table, const std::string& out_path, std::ostream& out) {
  const auto task = parse_task(task_name);
  const auto original = read_texts(original_path, task);
  const auto augmented = read_texts(augmented_path, task);
  std::vector<std::size_t> pairs;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < original.size(); ++i) by_id.emplace(original[i].key, i);
  for (std::size_t i = 0; i < augmented.size(); ++i) {
    if (augmented[i].source_id) {
      auto it = by_id.find(*augmented[i].source_id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::MalformedRecord, "source_id '" + *augmented[i].source_id + "' not in original set", i + 1);
      }
      pairs.push_back(it->second);
    } else if (augmented.size() == original.size()) {
      pairs.push_back(i);
    } else {
      throw Error(ErrorCode::InvalidArgument,
                  "augmented rows need source_id unless both files have the same length");
    }
  }
  std::vector<std::string> texts;
  for (const auto& r : original) texts.push_back(r.text);
  for (const auto& r : augmented) texts.push_back(r.text);
  std::vector<EmbeddingVector> vecs;
  if (endpoint.empty()) {
    vecs = embed_tfidf(texts);
  } else {
    HttpClient client(endpoint);
    vecs = embed_remote(client, texts);
  }
  const auto split = vecs.begin() + static_cast<std::ptrdiff_t>(original.size());
  const std::vector<EmbeddingVector> orig(vecs.begin(), split);
  const std::vector<EmbeddingVector> aug(split, vecs.end());
  const auto report = diversity(orig, aug, pairs, components);
  auto j = to_json(report);
  j["embeddings"] = endpoint.empty() ? "local-tfidf" : "remote";
  const auto rows = std::vector<std::vector<std::string>>{
      {"pairs", std::to_string(report.pairs)},
      {"mean cosine", fmt(report.mean_cosine)},
      {"pca variance (top " + std::to_string(report.n_components) + ")", fmt(report.pca_variance)}};
  emit(out, j, format_table({"metric", "value"}, rows), table, out_path);
  return kExitOk;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what();
    if (e.line()) err << " (line " << *e.line() << ")";
    err << "\n";
    return is_input_error(e.code()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

std::vector<ClassifierHandle> build_ensemble(const RunConfig& cfg, const Dataset& corpus) {
  std::vector<ClassifierHandle> ensemble;
  std::optional<Dataset> train;
  for (int i = 0; i < cfg.classifier.count; ++i) {
    if (kind_at(cfg, i) == ClassifierKind::Remote) {
      RemoteOptions opts;
      opts.endpoint = cfg.classifier.endpoint;
      const auto& names = cfg.classifier.remote_models;
      opts.model = names.empty() ? "model-" + std::to_string(i)
                                 : names[static_cast<std::size_t>(i) % names.size()];
      ensemble.push_back(std::make_shared<RemoteClassifier>(opts.model + "#" + std::to_string(i), cfg.task, opts));
      continue;
    }
    const auto path = model_path(cfg, i);
    if (std::filesystem::exists(path)) {
      auto model = LocalClassifier::load(path);
      if (model->task() != cfg.task) {
        throw Error(ErrorCode::Config, path.string() + " was trained for another task");
      }
      ensemble.push_back(std::move(model));
      continue;
    }
    if (!train) {
      train = training_set(cfg, corpus);
      spdlog::info("no saved model at {}; training in memory", path.string());
    }
    ensemble.push_back(train_member(cfg, *train, i));
  }
  return ensemble;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counterbias data augmentation", "coba"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  auto add_config = [&](CLI::App* sub, bool overrides) {
    sub->add_option("-c,--config", config, "Run configuration file")->required();
    if (!overrides) return;
    sub->add_option("--p-delete", o.p_delete, "Deletion probability for normal triples");
    sub->add_option("--k", o.k, "Top-K words per model");
    sub->add_option("--n-variants", o.n_variants, "Variants per example");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--workers", o.workers, "Worker threads");
  };
  auto* augment = app.add_subcommand("augment", "Generate counterbias data");
  add_config(augment, true);
  auto* train = app.add_subcommand("train-classifiers", "Train and save the local ensemble");
  add_config(train, true);
  auto* estimate = app.add_subcommand("estimate-cost", "Estimate LLM spend");
  add_config(estimate, true);

  auto* analyze = app.add_subcommand("analyze", "Measurement reports");
  analyze->require_subcommand(1);
  bool table = false;
  std::string out_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--table", table, "Print an aligned table instead of JSON");
    sub->add_option("-o,--out", out_path, "Also write the JSON report here");
  };
  std::string overlap_input;
  auto* overlap = analyze->add_subcommand("overlap", "Cross-model top-K duplication ratios");
  overlap->add_option("topk", overlap_input, "top-k JSONL written by augment")->required();
  add_common(overlap);

  std::string pos_input, tags, tagger = "heuristic";
  auto* pos = analyze->add_subcommand("pos", "POS-bucket ratios of important words");
  pos->add_option("words", pos_input, "top-k JSONL or whitespace-separated word list")->required();
  pos->add_option("--tags", tags, "word<TAB>TAG file; other words use --tagger");
  pos->add_option("--tagger", tagger, "heuristic, noun, verb, adjadv or others");
  add_common(pos);

  std::string original, augmented, task = "sentiment-binary", endpoint;
  int components = 50;
  auto* div = analyze->add_subcommand("diversity", "Cosine similarity and PCA explained variance");
  div->add_option("original", original, "Original dataset")->required();
  div->add_option("augmented", augmented, "Counterbias records or a second dataset")->required();
  div->add_option("--task", task, "Task for TSV inputs");
  div->add_option("--components", components, "Principal components");
  div->add_option("--embeddings-endpoint", endpoint, "Embedding server; local TF-IDF when empty");
  add_common(div);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  return guarded(err, [&] {
    if (*augment) return cmd_augment(config, o, out);
    if (*train) return cmd_train(config, o, out);
    if (*estimate) return cmd_estimate(config, o, out);
    if (*overlap) return cmd_overlap(overlap_input, table, out_path, out);
    if (*pos) return cmd_pos(pos_input, tags, tagger, table, out_path, out);
    if (*div) return cmd_diversity(original, augmented, task, components, endpoint, table, out_path, out);
    return kExitConfig;
  });
}

}  // namespace coba::cli
