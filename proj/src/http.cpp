#include "srtk/http.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "srtk/errors.hpp"

namespace srtk {

struct HttpClient::Request {
    bool is_post = true;
    std::string path;
    std::string body;
    std::string content_type;
    HttpHeaders headers;
    std::multimap<std::string, std::string> params;
};

namespace {

bool is_retryable(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

HttpClient::HttpClient(std::string_view url, HttpOptions options)
    : url_(url), options_(options) {
    const auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("invalid endpoint URL: " + url_);
    const auto scheme = url_.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("unsupported URL scheme in " + url_);
    }
    const auto path_start = url_.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin_ = url_;
        path_ = "/";
    } else {
        origin_ = url_.substr(0, path_start);
        path_ = url_.substr(path_start);
    }
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
    in_flight_ = std::make_unique<std::counting_semaphore<1024>>(
        static_cast<std::ptrdiff_t>(std::min<std::size_t>(options_.max_in_flight, 1024)));
}

HttpClient::~HttpClient() = default;

void HttpClient::throttle() {
    if (options_.min_request_interval.count() <= 0) return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(throttle_mutex_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + options_.min_request_interval;
    }
    std::this_thread::sleep_until(slot);
}

HttpResponse HttpClient::post(std::string_view body, std::string_view content_type,
                              const HttpHeaders& headers, std::string_view path_suffix) {
    Request request;
    request.is_post = true;
    request.path = path_;
    if (!path_suffix.empty()) {
        if (request.path.ends_with('/') && path_suffix.starts_with('/')) request.path.pop_back();
        request.path += path_suffix;
    }
    request.body = body;
    request.content_type = content_type;
    request.headers = headers;
    return execute(request);
}

HttpResponse HttpClient::get(const std::multimap<std::string, std::string>& params,
                             const HttpHeaders& headers) {
    Request request;
    request.is_post = false;
    request.path = path_;
    request.headers = headers;
    request.params = params;
    return execute(request);
}

HttpResponse HttpClient::execute(const Request& request) {
    auto backoff = options_.retry_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            spdlog::warn("{}: retrying after {} ({} ms)", url_, last_error, backoff.count());
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        throttle();

        httplib::Result result{nullptr, httplib::Error::Unknown};
        {
            in_flight_->acquire();
            httplib::Client client(origin_);
            const auto seconds = options_.timeout.count() / 1000;
            const auto micros = (options_.timeout.count() % 1000) * 1000;
            client.set_connection_timeout(seconds, micros);
            client.set_read_timeout(seconds, micros);
            client.set_write_timeout(seconds, micros);
            httplib::Headers headers(request.headers.begin(), request.headers.end());
            if (request.is_post) {
                result = client.Post(request.path, headers, request.body, request.content_type);
            } else {
                httplib::Params params(request.params.begin(), request.params.end());
                result = client.Get(request.path, params, headers);
            }
            in_flight_->release();
        }

        if (!result) {
            last_error = httplib::to_string(result.error());
            continue;
        }
        const int status = result->status;
        if (status >= 200 && status < 300) return {status, std::move(result->body)};
        if (status == 401 || status == 403) {
            throw AuthError(url_ + " rejected the request (HTTP " + std::to_string(status) + ")");
        }
        if (is_retryable(status)) {
            last_error = "HTTP " + std::to_string(status);
            continue;
        }
        throw ProtocolError(url_ + " answered HTTP " + std::to_string(status) + ": " +
                            result->body.substr(0, 200));
    }
    throw TransportError(url_ + " unreachable after " + std::to_string(options_.max_retries + 1) +
                         " attempts: " + last_error);
}

std::string url_encode(std::string_view value) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size() * 3);
    for (const char ch : value) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else if (c == ' ') {
            out.push_back('+');
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0x0F]);
        }
    }
    return out;
}

}  // namespace srtk
