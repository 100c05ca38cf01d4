#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace coba {

struct HttpOptions {
  int max_in_flight = 4;
  /// Total tries per request for transport errors, 429 and 5xx replies.
  int attempts = 3;
  std::chrono::milliseconds backoff{200};
  double timeout_seconds = 30.0;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Small JSON-over-HTTP client with a bound on concurrent requests and
/// bounded exponential-backoff retry. `base_url` is
/// scheme://host[:port][/prefix]; request paths are appended to the prefix.
class HttpClient {
 public:
  HttpClient(std::string base_url, HttpOptions options = {});
  ~HttpClient();

  HttpClient(const HttpClient&) = delete;
  HttpClient& operator=(const HttpClient&) = delete;

  /// Throws BackendUnavailable once retries are exhausted without an HTTP
  /// reply, or when the final reply is still 429/5xx. Other statuses are
  /// returned to the caller.
  HttpResponse post(const std::string& path, const nlohmann::json& body) const;
  HttpResponse get(const std::string& path) const;

  const std::string& base_url() const noexcept { return base_url_; }

 private:
  struct Impl;
  std::string base_url_;
  std::unique_ptr<Impl> impl_;
};

/// Parses a reply body as JSON. Throws BackendUnavailable on malformed JSON.
nlohmann::json parse_json_reply(const HttpResponse& response,
                                std::string_view what);

}  // namespace coba
