#include "coba/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coba/ensemble.hpp"
#include "coba/error.hpp"
#include "coba/http_client.hpp"
#include "coba/tokenize.hpp"
#include "digest.hpp"

namespace coba {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words, std::size_t begin,
                       std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

/// Lowercased word with surrounding punctuation removed.
std::string bare(std::string_view word) {
  auto toks = tokenize(word);
  return toks.size() == 1 ? toks.front() : to_lower(word);
}

bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

/// Replacement word in the case pattern of `original`.
std::string match_case(std::string_view original, std::string replacement) {
  if (original.size() > 1 &&
      std::all_of(original.begin(), original.end(),
                  [](char c) { return !std::isalpha(static_cast<unsigned char>(c)) ||
                                      is_upper_ascii(c); })) {
    for (char& c : replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (!original.empty() && is_upper_ascii(original.front()) && !replacement.empty()) {
    replacement.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
  }
  return replacement;
}

std::string sanitize_slot(std::string s) {
  std::replace(s.begin(), s.end(), '|', '/');
  return s;
}

std::string strip_trailing_punct(std::string w) {
  while (!w.empty() && std::strchr(",;:", w.back())) w.pop_back();
  return w;
}

std::map<std::string, std::string> symmetric(
    std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::map<std::string, std::string> out;
  for (auto [a, b] : pairs) {
    out[a] = b;
    out[b] = a;
  }
  return out;
}

}  // namespace

std::string_view to_string(PromptStage stage) noexcept {
  switch (stage) {
    case PromptStage::Ext: return "ext";
    case PromptStage::Mod: return "mod";
    case PromptStage::Rec: return "rec";
  }
  return "?";
}

void PromptTemplate::validate() const {
  if (user.find("{content}") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(to_string(stage)) + " template lacks {content}");
  }
  if (stage == PromptStage::Mod && user.find("{target_label}") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "mod template lacks {target_label}");
  }
}

std::string PromptTemplate::render(std::string_view content,
                                   std::optional<Label> target_label) const {
  std::string out = user;
  if (target_label) replace_all(out, "{target_label}", to_string(*target_label));
  replace_all(out, "{content}", content);
  return out;
}

std::string PromptTemplate::fingerprint() const {
  std::string blob;
  blob += to_string(task);
  blob.push_back('\0');
  blob += to_string(stage);
  blob.push_back('\0');
  blob += system;
  blob.push_back('\0');
  blob += user;
  return detail::sha256_hex(blob);
}

LlmParams default_params(PromptStage stage) {
  LlmParams p;
  p.temperature = stage == PromptStage::Rec ? 0.7 : 0.0;
  p.max_tokens = 2048;
  return p;
}

std::string LlmRequest::cache_key() const {
  std::string blob;
  for (const std::string& part :
       {backend_id, template_fingerprint, system, user,
        format_double(params.temperature), std::to_string(params.max_tokens),
        params.seed ? std::to_string(*params.seed) : std::string("-")}) {
    blob += std::to_string(part.size());
    blob.push_back(':');
    blob += part;
  }
  return detail::sha256_hex(blob);
}

LlmRequest make_request(std::string backend_id, const PromptTemplate& tmpl,
                        std::string content, std::optional<Label> target,
                        LlmParams params) {
  LlmRequest r;
  r.backend_id = std::move(backend_id);
  r.task = tmpl.task;
  r.stage = tmpl.stage;
  r.template_fingerprint = tmpl.fingerprint();
  r.system = tmpl.system;
  r.user = tmpl.render(content, target);
  r.content = std::move(content);
  r.target_label = target;
  r.params = params;
  return r;
}

std::int64_t approx_tokens(std::size_t chars) noexcept {
  return static_cast<std::int64_t>((chars + 3) / 4);
}

// ---------------------------------------------------------------------------
// Mock backend.

MockLexicons default_mock_lexicons() {
  MockLexicons lex;
  lex.verbs = {
      "is", "are", "was", "were", "am", "be", "been", "has", "have", "had",
      "love", "loves", "loved", "hate", "hates", "hated", "like", "likes",
      "liked", "dislike", "dislikes", "disliked", "enjoy", "enjoys",
      "enjoyed", "detest", "detests", "detested", "adore", "adores",
      "adored", "despise", "despises", "despised", "feel", "feels", "felt",
      "seem", "seems", "seemed", "look", "looks", "looked", "make", "makes",
      "made", "give", "gives", "gave", "deliver", "delivers", "delivered",
      "lack", "lacks", "lacked", "offer", "offers", "offered", "remain",
      "remains", "remained", "become", "becomes", "became", "recommend",
      "recommends", "recommended", "praise", "praises", "praised", "sit",
      "sits", "sat", "walk", "walks", "walked", "eat", "eats", "ate", "hold",
      "holds", "held", "wear", "wears", "wore", "ride", "rides", "rode",
      "play", "plays", "played", "watch", "watches", "watched", "talk",
      "talks", "talked", "run", "runs", "ran", "carry", "carries",
      "carried", "read", "reads", "cook", "cooks", "cooked", "visit",
      "visits", "visited", "sing", "sings", "sang"};
  lex.antonyms = symmetric({
      {"love", "hate"},          {"loves", "hates"},
      {"loved", "hated"},        {"like", "dislike"},
      {"likes", "dislikes"},     {"liked", "disliked"},
      {"enjoy", "detest"},       {"enjoys", "detests"},
      {"enjoyed", "detested"},   {"adore", "despise"},
      {"adores", "despises"},    {"adored", "despised"},
      {"praise", "criticize"},   {"praised", "criticized"},
      {"recommend", "discourage"}, {"recommended", "discouraged"},
      {"good", "bad"},           {"great", "terrible"},
      {"excellent", "awful"},    {"best", "worst"},
      {"wonderful", "dreadful"}, {"beautiful", "ugly"},
      {"fun", "dull"},           {"brilliant", "mediocre"},
      {"happy", "sad"},          {"fresh", "stale"},
      {"exciting", "boring"},    {"amazing", "disappointing"},
      {"delightful", "painful"}, {"clever", "stupid"},
      {"superb", "poor"},        {"perfect", "flawed"},
      {"charming", "annoying"},  {"memorable", "forgettable"},
      {"tasty", "bland"},        {"friendly", "rude"},
      {"strong", "weak"},        {"smart", "dumb"},
  });
  lex.negations = {"not", "never", "no"};
  return lex;
}

MockLexicons load_mock_lexicons(const std::filesystem::path& dir) {
  MockLexicons lex;
  lex.verbs = load_word_list(dir / "verbs.txt");
  lex.negations = load_word_list(dir / "negations.txt");
  std::ifstream in(dir / "antonyms.txt");
  if (!in) throw Error(ErrorCode::Io, "cannot open " + (dir / "antonyms.txt").string());
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto words = split_words(line);
    if (words.empty()) continue;
    if (words.size() != 2) {
      throw Error(ErrorCode::InvalidArgument, "antonyms.txt needs two columns: " + line);
    }
    const auto a = to_lower(words[0]);
    const auto b = to_lower(words[1]);
    lex.antonyms[a] = b;
    lex.antonyms[b] = a;
  }
  return lex;
}

MockBackend::MockBackend(MockLexicons lexicons) : lexicons_(std::move(lexicons)) {
  if (lexicons_.verbs.empty() || lexicons_.antonyms.empty() ||
      lexicons_.negations.empty()) {
    throw Error(ErrorCode::InvalidArgument, "mock backend needs non-empty lexicons");
  }
  for (const auto& [a, b] : lexicons_.antonyms) {
    auto it = lexicons_.antonyms.find(b);
    if (it == lexicons_.antonyms.end() || it->second != a) {
      throw Error(ErrorCode::InvalidArgument, "antonym map is not symmetric at '" + a + "'");
    }
  }
  std::string blob;
  for (const auto& v : lexicons_.verbs) blob += v + "\n";
  blob += "\x1e";
  for (const auto& [a, b] : lexicons_.antonyms) blob += a + "=" + b + "\n";
  blob += "\x1e";
  for (const auto& n : lexicons_.negations) blob += n + "\n";
  id_ = "mock-" + detail::sha256_hex(blob).substr(0, 12);
}

std::vector<Triple> MockBackend::decompose_sentences(std::string_view text,
                                                     int group) const {
  std::vector<Triple> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find_first_of(".!?", start);
    if (end == std::string_view::npos) end = text.size();
    const auto sentence = trim(text.substr(start, end - start));
    start = end + 1;
    if (sentence.empty()) continue;
    const auto words = split_words(sentence);
    std::size_t verb = words.size();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (lexicons_.verbs.count(bare(words[i]))) {
        verb = i;
        break;
      }
    }
    if (verb == words.size() || verb == 0 || verb + 1 == words.size()) {
      throw Error(ErrorCode::MockCannotDecompose,
                  "no subject-verb-object split for '" + std::string(sentence) + "'");
    }
    Triple t;
    t.subject = sanitize_slot(strip_trailing_punct(join_words(words, 0, verb)));
    t.predicate = sanitize_slot(strip_trailing_punct(words[verb]));
    t.object = sanitize_slot(strip_trailing_punct(join_words(words, verb + 1, words.size())));
    t.group = group;
    t.ordinal = static_cast<int>(out.size());
    if (trim(t.subject).empty() || trim(t.object).empty() || trim(t.predicate).empty()) {
      throw Error(ErrorCode::MockCannotDecompose,
                  "empty slot in '" + std::string(sentence) + "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string MockBackend::decompose_text(std::string_view content, TaskKind task) const {
  std::string out;
  if (task == TaskKind::SentimentBinary) {
    const auto triples = decompose_sentences(content, 1);
    for (std::size_t i = 0; i < triples.size(); ++i) {
      if (i) out.push_back('\n');
      out += std::to_string(i + 1) + ". " + format_triple(triples[i]);
    }
    return out;
  }
  std::string sent[2];
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    const auto l = trim(line);
    if (l.rfind("sent1:", 0) == 0) sent[0] = std::string(trim(l.substr(6)));
    if (l.rfind("sent2:", 0) == 0) sent[1] = std::string(trim(l.substr(6)));
  }
  for (int g = 1; g <= 2; ++g) {
    const auto triples = decompose_sentences(sent[g - 1], g);
    if (triples.empty()) {
      throw Error(ErrorCode::MockCannotDecompose, "sent" + std::to_string(g) + " is empty");
    }
    if (!out.empty()) out += "\n\n";
    out += "sent" + std::to_string(g) + ":";
    for (std::size_t i = 0; i < triples.size(); ++i) {
      out += "\n" + std::to_string(g) + "-" + std::to_string(i + 1) + ". " +
             format_triple(triples[i]);
    }
  }
  return out;
}

Triple MockBackend::modify(const Triple& t) const {
  Triple out = t;
  bool changed = false;
  auto swap_slot = [&](std::string& slot) {
    auto words = split_words(slot);
    for (auto& w : words) {
      // Keep trailing punctuation attached to the word.
      std::size_t core_end = w.size();
      while (core_end > 0 && std::ispunct(static_cast<unsigned char>(w[core_end - 1])) &&
             w[core_end - 1] != '\'' && w[core_end - 1] != '-') {
        --core_end;
      }
      const std::string core = w.substr(0, core_end);
      auto it = lexicons_.antonyms.find(to_lower(core));
      if (it != lexicons_.antonyms.end()) {
        w = match_case(core, it->second) + w.substr(core_end);
        changed = true;
      }
    }
    slot = join_words(words, 0, words.size());
  };
  swap_slot(out.predicate);
  swap_slot(out.object);
  if (changed) return out;

  auto words = split_words(out.object);
  auto neg = std::find_if(words.begin(), words.end(), [&](const std::string& w) {
    return lexicons_.negations.count(bare(w)) > 0;
  });
  if (neg != words.end() && words.size() > 1) {
    words.erase(neg);
  } else {
    words.insert(words.begin(), "not");
  }
  out.object = join_words(words, 0, words.size());
  return out;
}

std::string MockBackend::reconstruct_text(std::string_view content, TaskKind task) const {
  ParseResult parsed;
  try {
    parsed = parse_triples(content, task);
  } catch (const Error&) {
    return {};
  }
  auto sentences = [&](int group) {
    std::string out;
    for (const auto& e : parsed.triples.entries) {
      if (e.triple.group != group) continue;
      if (!out.empty()) out.push_back(' ');
      out += e.triple.subject + " " + e.triple.predicate + " " + e.triple.object + ".";
    }
    return out;
  };
  if (task == TaskKind::SentimentBinary) return sentences(1);
  return "reconstructed sent1:\n" + sentences(1) + "\nreconstructed sent2:\n" + sentences(2);
}

LlmResponse MockBackend::complete(const LlmRequest& request) const {
  LlmResponse resp;
  switch (request.stage) {
    case PromptStage::Ext:
      resp.text = decompose_text(request.content, request.task);
      break;
    case PromptStage::Mod: {
      Triple t;
      if (!parse_triple_line(request.content, t)) {
        resp.text = "I can't do that.";
      } else {
        resp.text = format_triple(modify(t));
      }
      break;
    }
    case PromptStage::Rec:
      resp.text = reconstruct_text(request.content, request.task);
      break;
  }
  resp.usage.input_tokens = approx_tokens(request.system.size() + request.user.size());
  resp.usage.output_tokens = approx_tokens(resp.text.size());
  return resp;
}

// ---------------------------------------------------------------------------
// Chat-completion backend.

ChatCompletionBackend::ChatCompletionBackend(ChatBackendOptions options)
    : options_(std::move(options)) {
  HttpOptions http;
  http.max_in_flight = options_.max_in_flight;
  http.attempts = options_.attempts;
  http.timeout_seconds = options_.timeout_seconds;
  if (!options_.api_key_env.empty()) {
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key) {
      http.headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
  }
  http_ = std::make_unique<HttpClient>(options_.base_url, http);
  id_ = "chat:" + options_.model + "@" + options_.base_url;
}

ChatCompletionBackend::~ChatCompletionBackend() = default;

LlmResponse ChatCompletionBackend::complete(const LlmRequest& request) const {
  nlohmann::json body;
  body["model"] = options_.model;
  body["messages"] = nlohmann::json::array(
      {{{"role", "system"}, {"content", request.system}},
       {{"role", "user"}, {"content", request.user}}});
  body["temperature"] = request.params.temperature;
  body["max_tokens"] = request.params.max_tokens;
  if (request.params.seed) body["seed"] = *request.params.seed;
  const auto resp = http_->post("/chat/completions", body);
  if (resp.status != 200) {
    throw Error(ErrorCode::BackendUnavailable,
                "chat completion returned HTTP " + std::to_string(resp.status) +
                    ": " + resp.body.substr(0, 200));
  }
  const auto j = parse_json_reply(resp, "chat completion");
  LlmResponse out;
  try {
    out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable,
                std::string("chat completion reply has no content: ") + e.what());
  }
  if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
    out.usage.input_tokens = usage->value("prompt_tokens", std::int64_t{0});
    out.usage.output_tokens = usage->value("completion_tokens", std::int64_t{0});
  } else {
    out.usage.input_tokens = approx_tokens(request.system.size() + request.user.size());
    out.usage.output_tokens = approx_tokens(out.text.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cache.

namespace {

std::string encode_entry(const CacheEntry& e) {
  nlohmann::ordered_json j;
  j["key"] = e.key;
  j["response"] = e.response_text;
  j["input_tokens"] = e.usage.input_tokens;
  j["output_tokens"] = e.usage.output_tokens;
  j["timestamp"] = e.timestamp;
  const std::string payload = j.dump();
  std::string record(4, '\0');
  const auto n = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) record[static_cast<std::size_t>(i)] = static_cast<char>((n >> (8 * i)) & 0xFF);
  return record + payload;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
  if (file_->has_parent_path()) std::filesystem::create_directories(file_->parent_path());
  std::ifstream in(*file_, std::ios::binary);
  if (!in) return;
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  std::size_t pos = 0;
  while (pos + 4 <= data.size()) {
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) {
      n |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)])) << (8 * i);
    }
    if (pos + 4 + n > data.size()) break;  // interrupted append
    try {
      const auto j = nlohmann::json::parse(data.substr(pos + 4, n));
      CacheEntry e;
      e.key = j.at("key").get<std::string>();
      e.response_text = j.at("response").get<std::string>();
      e.usage.input_tokens = j.value("input_tokens", std::int64_t{0});
      e.usage.output_tokens = j.value("output_tokens", std::int64_t{0});
      e.timestamp = j.value("timestamp", std::int64_t{0});
      entries_.emplace(e.key, std::move(e));
    } catch (const nlohmann::json::exception&) {
      break;
    }
    pos += 4 + n;
  }
}

std::optional<CacheEntry> ResponseCache::find(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(CacheEntry entry) {
  std::unique_lock lock(mutex_);
  if (entries_.count(entry.key)) return;
  if (file_) {
    std::ofstream out(*file_, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot append to " + file_->string());
    out << encode_entry(entry);
    out.flush();
  }
  auto key = entry.key;
  entries_.emplace(std::move(key), std::move(entry));
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

CachedBackend::CachedBackend(std::shared_ptr<const LlmBackend> inner,
                             std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
  if (!inner_ || !cache_) {
    throw Error(ErrorCode::InvalidArgument, "CachedBackend needs a backend and a cache");
  }
}

LlmResponse CachedBackend::complete(const LlmRequest& request) const {
  const auto key = request.cache_key();
  if (auto hit = cache_->find(key)) {
    std::lock_guard lock(stats_mutex_);
    ++stats_.requests;
    ++stats_.cache_hits;
    return {hit->response_text, hit->usage, true};
  }
  auto resp = inner_->complete(request);
  CacheEntry entry;
  entry.key = key;
  entry.response_text = resp.text;
  entry.usage = resp.usage;
  entry.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
  cache_->store(std::move(entry));
  {
    std::lock_guard lock(stats_mutex_);
    ++stats_.requests;
    ++stats_.backend_calls;
    stats_.billed += resp.usage;
  }
  return resp;
}

LlmStats CachedBackend::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

// ---------------------------------------------------------------------------
// Pipeline calls.

namespace {

LlmResponse call(const LlmBackend& backend, const PromptTemplate& tmpl,
                 std::string content, std::optional<Label> target,
                 const LlmParams& params) {
  const auto request = make_request(backend.id(), tmpl, std::move(content), target, params);
  auto resp = backend.complete(request);
  if (resp.usage.output_tokens > params.max_tokens) {
    throw Error(ErrorCode::ResponseTooLong,
                std::to_string(resp.usage.output_tokens) + " output tokens exceed " +
                    std::to_string(params.max_tokens));
  }
  return resp;
}

void require_stage(const PromptTemplate& tmpl, PromptStage stage) {
  if (tmpl.stage != stage) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("expected a ") + std::string(to_string(stage)) +
                    " template, got " + std::string(to_string(tmpl.stage)));
  }
  tmpl.validate();
}

}  // namespace

std::string decomposition_content(const Example& example, TaskKind task) {
  if (task == TaskKind::SentimentBinary) return example.text1;
  return "sent1: " + example.text1 + "\nsent2: " + example.text2.value_or("") +
         "\nlabel: " + std::string(to_string(example.label));
}

std::string decompose(const LlmBackend& backend, const Example& example,
                      const PromptTemplate& tmpl, const LlmParams& params) {
  require_stage(tmpl, PromptStage::Ext);
  if (trim(example.text1).empty() ||
      (tmpl.task == TaskKind::Nli3Way && trim(example.text2.value_or("")).empty())) {
    throw Error(ErrorCode::EmptyText, "example '" + example.id + "' has empty text");
  }
  return call(backend, tmpl, decomposition_content(example, tmpl.task), std::nullopt, params).text;
}

Triple modify_triple(const LlmBackend& backend, const Triple& t, Label target_label,
                     const PromptTemplate& tmpl, const LlmParams& params) {
  require_stage(tmpl, PromptStage::Mod);
  const auto reply = call(backend, tmpl, format_triple(t), target_label, params).text;
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    Triple parsed;
    if (parse_triple_line(line, parsed)) {
      parsed.group = t.group;
      parsed.ordinal = t.ordinal;
      return parsed;
    }
  }
  throw Error(ErrorCode::UnparsableModification,
              "no triple in modification reply: '" + reply.substr(0, 120) + "'");
}

std::string reconstruct(const LlmBackend& backend, std::string_view serialized,
                        const PromptTemplate& tmpl, const LlmParams& params) {
  require_stage(tmpl, PromptStage::Rec);
  auto text = std::string(trim(call(backend, tmpl, std::string(serialized), std::nullopt, params).text));
  if (text.empty()) throw Error(ErrorCode::EmptyReconstruction, "empty reconstruction");
  return text;
}

std::pair<std::string, std::string> split_nli_reconstruction(std::string_view text) {
  std::string lower(text);
  for (char& c : lower) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  constexpr std::string_view h1 = "reconstructed sent1:";
  constexpr std::string_view h2 = "reconstructed sent2:";
  const auto p1 = lower.find(h1);
  const auto p2 = lower.find(h2);
  if (p1 == std::string::npos || p2 == std::string::npos || p2 < p1) {
    throw Error(ErrorCode::EmptyReconstruction,
                "reconstruction lacks 'reconstructed sent1:' / 'reconstructed sent2:'");
  }
  auto s1 = std::string(trim(text.substr(p1 + h1.size(), p2 - p1 - h1.size())));
  auto s2 = std::string(trim(text.substr(p2 + h2.size())));
  if (s1.empty() || s2.empty()) {
    throw Error(ErrorCode::EmptyReconstruction, "empty reconstructed sentence");
  }
  return {std::move(s1), std::move(s2)};
}

}  // namespace coba
