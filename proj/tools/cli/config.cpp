#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "coba/error.hpp"
#include "coba/tokenize.hpp"

namespace coba::cli {

namespace {

[[noreturn]] void fail(const std::string& message, std::size_t line = 0) {
  throw Error(ErrorCode::Config, message, line);
}

std::string expand_env(std::string_view s, std::size_t line) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 2, "${") == 0) {
      const auto close = s.find('}', i + 2);
      if (close == std::string_view::npos) fail("unterminated ${...}", line);
      const std::string name(s.substr(i + 2, close - i - 2));
      const char* value = std::getenv(name.c_str());
      if (!value) fail("environment variable " + name + " is not set", line);
      out += value;
      i = close + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

/// Reads a quoted string starting at s[pos]; advances pos past the closing
/// quote.
std::string read_string(std::string_view s, std::size_t& pos, std::size_t line) {
  const char quote = s[pos++];
  std::string out;
  while (pos < s.size() && s[pos] != quote) {
    char c = s[pos++];
    if (quote == '"' && c == '\\') {
      if (pos >= s.size()) break;
      switch (char e = s[pos++]) {
        case 'n': c = '\n'; break;
        case 't': c = '\t'; break;
        case '"': case '\\': c = e; break;
        default: fail(std::string("unknown escape \\") + e, line);
      }
    }
    out.push_back(c);
  }
  if (pos >= s.size()) fail("unterminated string", line);
  ++pos;
  return quote == '"' ? expand_env(out, line) : out;
}

std::string strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == '\\' && quote == '"') ++i;
      else if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return std::string(line.substr(0, i));
    }
  }
  return std::string(line);
}

ConfigFile::Value parse_value(std::string_view raw, std::size_t line) {
  const auto v = trim(raw);
  if (v.empty()) fail("missing value", line);
  if (v.front() == '"' || v.front() == '\'') {
    std::size_t pos = 0;
    auto s = read_string(v, pos, line);
    if (!trim(v.substr(pos)).empty()) fail("trailing characters after string", line);
    return s;
  }
  if (v.front() == '[') {
    if (v.back() != ']') fail("unterminated list", line);
    std::vector<std::string> items;
    const auto body = v.substr(1, v.size() - 2);
    std::size_t pos = 0;
    while (true) {
      while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
      if (pos >= body.size()) break;
      if (body[pos] != '"' && body[pos] != '\'') fail("list items must be quoted strings", line);
      items.push_back(read_string(body, pos, line));
      while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
      if (pos < body.size()) {
        if (body[pos] != ',') fail("expected ',' between list items", line);
        ++pos;
      }
    }
    return items;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  double d = 0.0;
  const std::string text(v);
  char* end = nullptr;
  d = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(d)) {
    fail("cannot parse value '" + text + "' (quote strings)", line);
  }
  return d;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view content) {
  ConfigFile cfg;
  std::string section;
  std::istringstream in{std::string(content)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto stripped = strip_comment(raw);
    const auto line = trim(stripped);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("bad section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) fail("empty section name", line_no);
      cfg.values_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value", line_no);
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail("empty key", line_no);
    auto& sec = cfg.values_[section];
    if (sec.count(key)) fail("duplicate key '" + key + "'", line_no);
    sec.emplace(key, parse_value(line.substr(eq + 1), line_no));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const ConfigFile::Value* ConfigFile::find(std::string_view section, std::string_view key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return nullptr;
  auto k = s->second.find(std::string(key));
  return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigFile::has(std::string_view section, std::string_view key) const {
  return find(section, key) != nullptr;
}

namespace {

std::string where(std::string_view section, std::string_view key) {
  return "[" + std::string(section) + "] " + std::string(key);
}

}  // namespace

std::optional<std::string> ConfigFile::get_string(std::string_view section,
                                                  std::string_view key) const {
  const auto* v = find(section, key);
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  fail(where(section, key) + " must be a string");
}

std::optional<double> ConfigFile::get_number(std::string_view section,
                                             std::string_view key) const {
  const auto* v = find(section, key);
  if (!v) return std::nullopt;
  if (const auto* d = std::get_if<double>(v)) return *d;
  fail(where(section, key) + " must be a number");
}

std::optional<std::int64_t> ConfigFile::get_int(std::string_view section,
                                                std::string_view key) const {
  const auto d = get_number(section, key);
  if (!d) return std::nullopt;
  if (std::floor(*d) != *d || std::fabs(*d) > 9.0e15) {
    fail(where(section, key) + " must be an integer");
  }
  return static_cast<std::int64_t>(*d);
}

std::optional<bool> ConfigFile::get_bool(std::string_view section, std::string_view key) const {
  const auto* v = find(section, key);
  if (!v) return std::nullopt;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  fail(where(section, key) + " must be true or false");
}

std::optional<std::vector<std::string>> ConfigFile::get_list(std::string_view section,
                                                             std::string_view key) const {
  const auto* v = find(section, key);
  if (!v) return std::nullopt;
  if (const auto* l = std::get_if<std::vector<std::string>>(v)) return *l;
  if (const auto* s = std::get_if<std::string>(v)) return std::vector<std::string>{*s};
  fail(where(section, key) + " must be a list of strings");
}

std::vector<std::string> ConfigFile::unknown_keys(std::string_view section,
                                                  const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  auto s = values_.find(section);
  if (s == values_.end()) return out;
  for (const auto& [k, v] : s->second) {
    if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
  }
  return out;
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, v] : values_) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> keys = {
      {"corpus", {"path", "format", "task", "header"}},
      {"augment",
       {"k", "tau", "p_delete", "n_variants", "gender_lexicon", "extra_spurious",
        "verify", "seed"}},
      {"importance",
       {"method", "lime_samples", "kernel_width", "exhaustive", "shapley_mode",
        "shapley_permutations", "remote_method", "remote_steps"}},
      {"classifier",
       {"kinds", "count", "sample_fraction", "train_path", "model_dir", "endpoint",
        "models"}},
      {"llm",
       {"backend", "base_url", "model", "api_key_env", "mock_lexicon_dir", "max_tokens",
        "max_in_flight", "attempts", "timeout_seconds"}},
      {"cost",
       {"n_examples", "avg_chars", "rate_in", "rate_out", "expected_principal_triples"}},
      {"run", {"cache_dir", "output_dir", "workers"}},
  };
  return keys;
}

template <typename T, typename F>
T parse_enum(const std::string& where, const std::string& value, F parser) {
  try {
    return parser(value);
  } catch (const Error& e) {
    fail(where + ": " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

RunConfig run_config_from(const ConfigFile& f, const std::filesystem::path& base) {
  for (const auto& section : f.sections()) {
    auto it = known_keys().find(section);
    if (it == known_keys().end()) fail("unknown section [" + section + "]");
    if (auto extra = f.unknown_keys(section, it->second); !extra.empty()) {
      fail("unknown key " + where(section, extra.front()));
    }
  }

  RunConfig c;
  const auto path = f.get_string("corpus", "path");
  if (!path) fail("[corpus] path is required");
  c.dataset = resolve(base, *path);
  if (auto t = f.get_string("corpus", "task")) {
    c.task = parse_enum<TaskKind>("[corpus] task", *t, [](const std::string& s) { return parse_task(s); });
  }
  if (auto fmt = f.get_string("corpus", "format")) {
    c.format = parse_enum<DataFormat>("[corpus] format", *fmt,
                                      [](const std::string& s) { return parse_format(s); });
  } else {
    c.format = parse_enum<DataFormat>("[corpus] path", c.dataset.string(),
                                      [](const std::string& s) { return format_from_path(s); });
  }
  c.load.header = f.get_bool("corpus", "header").value_or(false);

  auto& a = c.augment;
  a.k = static_cast<int>(f.get_int("augment", "k").value_or(a.k));
  if (auto tau = f.get_int("augment", "tau")) a.tau = static_cast<int>(*tau);
  a.p_delete = f.get_number("augment", "p_delete").value_or(a.p_delete);
  a.n_variants = static_cast<int>(f.get_int("augment", "n_variants").value_or(a.n_variants));
  if (auto g = f.get_string("augment", "gender_lexicon")) a.gender_lexicon_path = resolve(base, *g);
  if (auto x = f.get_string("augment", "extra_spurious")) a.extra_spurious_path = resolve(base, *x);
  a.verify = f.get_bool("augment", "verify").value_or(false);
  if (auto seed = f.get_int("augment", "seed")) {
    if (*seed < 0) fail("[augment] seed must be >= 0");
    a.seed = static_cast<std::uint64_t>(*seed);
  }

  auto& imp = c.importance;
  if (auto m = f.get_string("importance", "method")) {
    imp.method = parse_enum<ImportanceMethod>("[importance] method", *m, [](const std::string& s) {
      return parse_importance_method(s);
    });
  }
  imp.lime.n_samples = static_cast<int>(f.get_int("importance", "lime_samples").value_or(imp.lime.n_samples));
  imp.lime.kernel_width = f.get_number("importance", "kernel_width").value_or(imp.lime.kernel_width);
  imp.lime.exhaustive = f.get_bool("importance", "exhaustive").value_or(false);
  if (auto mode = f.get_string("importance", "shapley_mode")) {
    if (*mode == "exact") imp.shapley.mode = ShapleyMode::Exact;
    else if (*mode == "sampled") imp.shapley.mode = ShapleyMode::Sampled;
    else fail("[importance] shapley_mode must be exact or sampled");
  }
  imp.shapley.n_permutations = static_cast<int>(
      f.get_int("importance", "shapley_permutations").value_or(imp.shapley.n_permutations));
  imp.remote_method = f.get_string("importance", "remote_method").value_or(imp.remote_method);
  if (auto steps = f.get_int("importance", "remote_steps")) imp.remote_steps = static_cast<int>(*steps);

  auto& cl = c.classifier;
  if (auto kinds = f.get_list("classifier", "kinds")) {
    cl.kinds.clear();
    for (const auto& k : *kinds) {
      cl.kinds.push_back(parse_enum<ClassifierKind>("[classifier] kinds", k, [](const std::string& s) {
        return parse_classifier_kind(s);
      }));
    }
    if (cl.kinds.empty()) fail("[classifier] kinds is empty");
  }
  cl.count = static_cast<int>(f.get_int("classifier", "count").value_or(cl.count));
  cl.sample_fraction = f.get_number("classifier", "sample_fraction").value_or(cl.sample_fraction);
  if (auto t = f.get_string("classifier", "train_path")) cl.train_path = resolve(base, *t);
  cl.endpoint = f.get_string("classifier", "endpoint").value_or("");
  cl.remote_models = f.get_list("classifier", "models").value_or(std::vector<std::string>{});

  auto& llm = c.llm;
  llm.backend = f.get_string("llm", "backend").value_or("mock");
  if (llm.backend != "mock" && llm.backend != "chat") fail("[llm] backend must be mock or chat");
  llm.chat.base_url = f.get_string("llm", "base_url").value_or(llm.chat.base_url);
  llm.chat.model = f.get_string("llm", "model").value_or(llm.chat.model);
  llm.chat.api_key_env = f.get_string("llm", "api_key_env").value_or(llm.chat.api_key_env);
  llm.chat.max_in_flight = static_cast<int>(f.get_int("llm", "max_in_flight").value_or(llm.chat.max_in_flight));
  llm.chat.attempts = static_cast<int>(f.get_int("llm", "attempts").value_or(llm.chat.attempts));
  llm.chat.timeout_seconds = f.get_number("llm", "timeout_seconds").value_or(llm.chat.timeout_seconds);
  if (auto d = f.get_string("llm", "mock_lexicon_dir")) llm.mock_lexicon_dir = resolve(base, *d);
  if (auto mt = f.get_int("llm", "max_tokens")) llm.max_tokens = static_cast<int>(*mt);

  auto& cost = c.cost;
  cost.n_examples = f.get_int("cost", "n_examples");
  cost.avg_chars = f.get_int("cost", "avg_chars");
  cost.rates.input_per_million = f.get_number("cost", "rate_in").value_or(cost.rates.input_per_million);
  cost.rates.output_per_million = f.get_number("cost", "rate_out").value_or(cost.rates.output_per_million);
  cost.expected_principal_triples =
      f.get_number("cost", "expected_principal_triples").value_or(cost.expected_principal_triples);

  c.output_dir = resolve(base, f.get_string("run", "output_dir").value_or("out"));
  c.cache_dir = resolve(base, f.get_string("run", "cache_dir").value_or((c.output_dir / "cache").string()));
  cl.model_dir = resolve(base, f.get_string("classifier", "model_dir").value_or((c.output_dir / "models").string()));
  c.workers = static_cast<int>(f.get_int("run", "workers").value_or(1));

  if (c.workers < 1) fail("[run] workers must be >= 1");
  if (cl.count < 1) fail("[classifier] count must be >= 1");
  if (!(cl.sample_fraction > 0.0 && cl.sample_fraction <= 1.0)) {
    fail("[classifier] sample_fraction must lie in (0, 1]");
  }
  const bool remote = std::find(cl.kinds.begin(), cl.kinds.end(), ClassifierKind::Remote) != cl.kinds.end();
  if (remote && cl.endpoint.empty()) fail("[classifier] endpoint is required for remote models");
  if (imp.method == ImportanceMethod::Remote && !remote) {
    fail("[importance] method = remote needs remote classifiers");
  }
  if (cost.rates.input_per_million < 0 || cost.rates.output_per_million < 0) {
    fail("[cost] rates must be >= 0");
  }
  try {
    c.augment.validate();
  } catch (const Error& e) {
    fail(std::string("[augment] ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto file = ConfigFile::load(path);
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return run_config_from(file, std::filesystem::absolute(base));
}

void check_paths(const RunConfig& cfg) {
  auto need = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p)) fail(std::string(what) + " not found: " + p.string());
  };
  need(cfg.dataset, "dataset");
  if (cfg.classifier.train_path) need(*cfg.classifier.train_path, "classifier training set");
  if (cfg.augment.gender_lexicon_path) need(*cfg.augment.gender_lexicon_path, "gender lexicon");
  if (cfg.augment.extra_spurious_path) need(*cfg.augment.extra_spurious_path, "spurious word list");
  if (cfg.llm.mock_lexicon_dir) need(*cfg.llm.mock_lexicon_dir, "mock lexicon directory");
}

}  // namespace coba::cli
