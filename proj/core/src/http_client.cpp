#include "coba/http_client.hpp"

#include <semaphore>
#include <thread>

#include <httplib.h>

#include "coba/error.hpp"

namespace coba {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "URL without scheme: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidArgument, "unsupported URL scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  if (out.origin.size() <= scheme_end + 3) {
    throw Error(ErrorCode::InvalidArgument, "URL without host: " + url);
  }
  return out;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

struct HttpClient::Impl {
  ParsedUrl url;
  HttpOptions options;
  std::counting_semaphore<1 << 16> in_flight;

  Impl(ParsedUrl u, HttpOptions o)
      : url(std::move(u)),
        options(std::move(o)),
        in_flight(std::max(1, options.max_in_flight)) {}

  template <typename Send>
  HttpResponse run(const std::string& path, Send send) {
    in_flight.acquire();
    struct Release {
      std::counting_semaphore<1 << 16>& s;
      ~Release() { s.release(); }
    } release{in_flight};

    std::string last_error = "no attempt made";
    const int attempts = std::max(1, options.attempts);
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(options.backoff * (1 << (attempt - 1)));
      }
      httplib::Client client(url.origin);
      const auto secs = static_cast<time_t>(options.timeout_seconds);
      const auto usecs = static_cast<time_t>(
          (options.timeout_seconds - static_cast<double>(secs)) * 1e6);
      client.set_connection_timeout(secs, usecs);
      client.set_read_timeout(secs, usecs);
      client.set_write_timeout(secs, usecs);
      httplib::Headers headers;
      for (const auto& [k, v] : options.headers) headers.emplace(k, v);
      auto result = send(client, url.prefix + path, headers);
      if (!result) {
        last_error = httplib::to_string(result.error());
        continue;
      }
      if (retryable(result->status) && attempt + 1 < attempts) {
        last_error = "HTTP " + std::to_string(result->status);
        continue;
      }
      if (retryable(result->status)) {
        throw Error(ErrorCode::BackendUnavailable,
                    url.origin + url.prefix + path + " returned HTTP " +
                        std::to_string(result->status));
      }
      return {result->status, result->body};
    }
    throw Error(ErrorCode::BackendUnavailable,
                url.origin + url.prefix + path + ": " + last_error);
  }
};

HttpClient::HttpClient(std::string base_url, HttpOptions options)
    : base_url_(std::move(base_url)),
      impl_(std::make_unique<Impl>(parse_url(base_url_), std::move(options))) {}

HttpClient::~HttpClient() = default;

HttpResponse HttpClient::post(const std::string& path,
                              const nlohmann::json& body) const {
  const std::string payload = body.dump();
  return impl_->run(path, [&](httplib::Client& c, const std::string& full,
                              const httplib::Headers& h) {
    return c.Post(full, h, payload, "application/json");
  });
}

HttpResponse HttpClient::get(const std::string& path) const {
  return impl_->run(path, [&](httplib::Client& c, const std::string& full,
                              const httplib::Headers& h) {
    return c.Get(full, h);
  });
}

nlohmann::json parse_json_reply(const HttpResponse& response,
                                std::string_view what) {
  try {
    return nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BackendUnavailable,
                std::string(what) + ": malformed JSON reply: " + e.what());
  }
}

}  // namespace coba
