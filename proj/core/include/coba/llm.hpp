#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coba/corpus.hpp"
#include "coba/triple.hpp"

namespace coba {

class HttpClient;

enum class PromptStage { Ext, Mod, Rec };

std::string_view to_string(PromptStage stage) noexcept;

/// A stage-specific prompt. `user` carries the placeholders `{content}` and,
/// for modification prompts, `{target_label}`.
struct PromptTemplate {
  TaskKind task = TaskKind::SentimentBinary;
  PromptStage stage = PromptStage::Ext;
  std::string system;
  std::string user;

  /// Throws InvalidArgument if a required placeholder is missing.
  void validate() const;
  std::string render(std::string_view content,
                     std::optional<Label> target_label = std::nullopt) const;
  /// SHA-256 hex over task, stage and both texts.
  std::string fingerprint() const;
};

PromptTemplate default_template(TaskKind task, PromptStage stage);

struct PromptSet {
  PromptTemplate ext;
  PromptTemplate mod;
  PromptTemplate rec;
};

PromptSet default_prompts(TaskKind task);

struct LlmParams {
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;
};

/// Stage defaults: 0.0 for decomposition and modification, 0.7 for
/// reconstruction.
LlmParams default_params(PromptStage stage);

struct LlmRequest {
  std::string backend_id;
  TaskKind task = TaskKind::SentimentBinary;
  PromptStage stage = PromptStage::Ext;
  std::string template_fingerprint;
  std::string system;
  /// Template with placeholders substituted.
  std::string user;
  /// The substituted `{content}` value, kept for structured backends.
  std::string content;
  std::optional<Label> target_label;
  LlmParams params;

  /// SHA-256 hex over backend id, fingerprint, resolved prompt and params.
  std::string cache_key() const;
};

LlmRequest make_request(std::string backend_id, const PromptTemplate& tmpl,
                        std::string content, std::optional<Label> target,
                        LlmParams params);

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& other) noexcept {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

/// chars/4 rounded up.
std::int64_t approx_tokens(std::size_t chars) noexcept;

struct LlmResponse {
  std::string text;
  TokenUsage usage;
  bool from_cache = false;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual const std::string& id() const noexcept = 0;
  /// Must be safe to call concurrently. Throws BackendUnavailable on
  /// transport failure.
  virtual LlmResponse complete(const LlmRequest& request) const = 0;
};

// ---------------------------------------------------------------------------
// Deterministic offline backend.

struct MockLexicons {
  std::set<std::string> verbs;
  /// Symmetric word map (a -> b implies b -> a).
  std::map<std::string, std::string> antonyms;
  std::set<std::string> negations;
};

MockLexicons default_mock_lexicons();
/// `verbs`, `antonyms` (two columns) and `negations` files in `dir`.
MockLexicons load_mock_lexicons(const std::filesystem::path& dir);

/// Rule-based stand-in for the LLM.
///   ext: split sentences at . ! ?, split each at its first lexicon verb.
///   mod: apply the antonym map to predicate and object words; if nothing
///        changed, toggle a negation marker in the object.
///   rec: "subject predicate object." per triple, in the given order.
class MockBackend final : public LlmBackend {
 public:
  explicit MockBackend(MockLexicons lexicons);

  const std::string& id() const noexcept override { return id_; }
  LlmResponse complete(const LlmRequest& request) const override;

  std::string decompose_text(std::string_view content, TaskKind task) const;
  Triple modify(const Triple& t) const;
  std::string reconstruct_text(std::string_view content, TaskKind task) const;

 private:
  std::vector<Triple> decompose_sentences(std::string_view text,
                                          int group) const;

  std::string id_ = "mock";
  MockLexicons lexicons_;
};

// ---------------------------------------------------------------------------
// Chat-completion HTTP backend.

struct ChatBackendOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  /// Environment variable holding the bearer token.
  std::string api_key_env = "OPENAI_API_KEY";
  int max_in_flight = 4;
  int attempts = 3;
  double timeout_seconds = 60.0;
};

class ChatCompletionBackend final : public LlmBackend {
 public:
  explicit ChatCompletionBackend(ChatBackendOptions options);
  ~ChatCompletionBackend() override;

  const std::string& id() const noexcept override { return id_; }
  LlmResponse complete(const LlmRequest& request) const override;

 private:
  std::string id_;
  ChatBackendOptions options_;
  std::unique_ptr<HttpClient> http_;
};

// ---------------------------------------------------------------------------
// Persistent response cache.

struct CacheEntry {
  std::string key;
  std::string response_text;
  TokenUsage usage;
  std::int64_t timestamp = 0;  // unix seconds
};

/// Append-only file of length-prefixed JSON records with an in-memory index.
/// A truncated trailing record (interrupted write) is ignored on load.
class ResponseCache {
 public:
  ResponseCache() = default;  // memory only
  explicit ResponseCache(std::filesystem::path file);

  std::optional<CacheEntry> find(const std::string& key) const;
  void store(CacheEntry entry);
  std::size_t size() const;
  const std::optional<std::filesystem::path>& file() const noexcept {
    return file_;
  }

 private:
  std::optional<std::filesystem::path> file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, CacheEntry> entries_;
};

struct LlmStats {
  std::int64_t requests = 0;
  std::int64_t cache_hits = 0;
  std::int64_t backend_calls = 0;
  /// Usage of backend calls only (cache hits cost nothing).
  TokenUsage billed;
};

/// Serves repeated requests from the cache and records usage.
class CachedBackend final : public LlmBackend {
 public:
  CachedBackend(std::shared_ptr<const LlmBackend> inner,
                std::shared_ptr<ResponseCache> cache);

  const std::string& id() const noexcept override { return inner_->id(); }
  LlmResponse complete(const LlmRequest& request) const override;

  LlmStats stats() const;

 private:
  std::shared_ptr<const LlmBackend> inner_;
  std::shared_ptr<ResponseCache> cache_;
  mutable std::mutex stats_mutex_;
  mutable LlmStats stats_;
};

// ---------------------------------------------------------------------------
// Pipeline calls.

/// Content block sent with the decomposition prompt.
std::string decomposition_content(const Example& example, TaskKind task);

/// Returns the backend reply verbatim. Throws EmptyText for an empty input
/// and ResponseTooLong when reported output exceeds max_tokens.
std::string decompose(const LlmBackend& backend, const Example& example,
                      const PromptTemplate& tmpl, const LlmParams& params);

/// Group and ordinal are inherited from `t`. Throws UnparsableModification
/// if the reply contains no pipe-format triple.
Triple modify_triple(const LlmBackend& backend, const Triple& t,
                     Label target_label, const PromptTemplate& tmpl,
                     const LlmParams& params);

/// Reply stripped of surrounding whitespace. Throws EmptyReconstruction.
std::string reconstruct(const LlmBackend& backend, std::string_view serialized,
                        const PromptTemplate& tmpl, const LlmParams& params);

/// Splits an NLI reconstruction at the "reconstructed sent1:" and
/// "reconstructed sent2:" headers. Throws EmptyReconstruction if either
/// section is missing or empty.
std::pair<std::string, std::string> split_nli_reconstruction(
    std::string_view text);

}  // namespace coba
