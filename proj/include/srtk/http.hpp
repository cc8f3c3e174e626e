#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>

namespace srtk {

struct HttpOptions {
    std::chrono::milliseconds timeout{30'000};
    int max_retries = 3;
    /// Delay before the first retry; doubles on every further attempt.
    std::chrono::milliseconds retry_backoff{500};
    /// Minimum spacing between the starts of two consecutive requests.
    std::chrono::milliseconds min_request_interval{0};
    std::size_t max_in_flight = 4;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::multimap<std::string, std::string>;

/// Blocking HTTP client for one endpoint URL with retry, throttling and an
/// in-flight request limit. Safe to share between threads.
class HttpClient {
public:
    HttpClient(std::string_view url, HttpOptions options);
    ~HttpClient();

    HttpClient(const HttpClient&) = delete;
    HttpClient& operator=(const HttpClient&) = delete;

    /// POST to the endpoint URL (optionally with `path_suffix` appended).
    /// 2xx returns the response; 401/403 throw AuthError; other 4xx throw ProtocolError;
    /// connection failures, 429 and 5xx are retried, then throw TransportError.
    HttpResponse post(std::string_view body, std::string_view content_type,
                      const HttpHeaders& headers = {}, std::string_view path_suffix = {});
    HttpResponse get(const std::multimap<std::string, std::string>& params,
                     const HttpHeaders& headers = {});

    const std::string& url() const { return url_; }
    const HttpOptions& options() const { return options_; }

private:
    struct Request;
    HttpResponse execute(const Request& request);
    void throttle();

    std::string url_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;
    HttpOptions options_;
    std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
    std::mutex throttle_mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
};

/// application/x-www-form-urlencoded encoding of one value.
std::string url_encode(std::string_view value);

}  // namespace srtk
