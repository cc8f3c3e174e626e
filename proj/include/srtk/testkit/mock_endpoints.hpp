#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "srtk/kgsource.hpp"
#include "srtk/memory_source.hpp"

namespace srtk::testkit {

struct MockRequest {
    std::string method;
    std::string path;
    std::string body;
    std::multimap<std::string, std::string> params;
    std::multimap<std::string, std::string> headers;

    std::string param(const std::string& key) const;
    std::string header(const std::string& key) const;
};

struct MockReply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Local HTTP server on an ephemeral port. Subclasses answer requests in
/// handle(); the base counts calls and injects failures. Tolerates concurrent requests.
class MockServer {
public:
    MockServer();
    virtual ~MockServer();

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    /// Base URL, e.g. http://127.0.0.1:34567
    std::string url() const;
    int port() const { return port_; }

    std::size_t calls() const { return calls_; }
    void reset_calls() { calls_ = 0; }

    /// The next `count` requests fail with `status`.
    void fail_next(std::size_t count, int status = 503);
    /// Requests whose body or parameters contain `needle` fail with `status`.
    void fail_matching(std::string needle, int status = 400);

protected:
    /// Must be called by the subclass constructor once it can serve requests.
    void start();
    /// Must be called by the subclass destructor, before its members go away.
    void stop();
    virtual MockReply handle(const MockRequest& request) = 0;

private:
    struct Impl;
    MockReply dispatch(const MockRequest& request);

    std::unique_ptr<Impl> impl_;
    int port_ = 0;
    std::atomic<std::size_t> calls_{0};
    std::mutex failure_mutex_;
    std::size_t failures_left_ = 0;
    int failure_status_ = 503;
    std::vector<std::pair<std::string, int>> failure_needles_;
};

/// SPARQL endpoint that recognizes the query templates issued by SparqlSource and
/// answers them from a fixture. Anything else gets 400.
class MockSparqlEndpoint final : public MockServer {
public:
    MockSparqlEndpoint(TripleStoreFixture fixture, KnowledgeGraphProfile profile);
    ~MockSparqlEndpoint() override;

    std::string endpoint() const { return url() + "/sparql"; }
    std::size_t label_queries() const { return label_queries_; }

protected:
    MockReply handle(const MockRequest& request) override;

private:
    InMemorySource source_;
    KnowledgeGraphProfile profile_;
    std::atomic<std::size_t> label_queries_{0};
};

/// REL-style linker. Every occurrence of a dictionary surface form becomes a row
/// `[start, length, surface, title, 0.9, 0.9, "NER"]`.
class MockRelEndpoint final : public MockServer {
public:
    /// (surface form, Wikipedia title) pairs; `required_token` enables 401s.
    MockRelEndpoint(std::vector<std::pair<std::string, std::string>> dictionary,
                    std::optional<std::string> required_token = {});
    ~MockRelEndpoint() override;

protected:
    MockReply handle(const MockRequest& request) override;

private:
    std::vector<std::pair<std::string, std::string>> dictionary_;
    std::optional<std::string> token_;
};

struct SpotlightEntry {
    std::string surface;
    std::string uri;
    double score = 0.99;
};

/// Spotlight-style linker; offsets in UTF-16 code units and numbers as strings,
/// the way the real service sends them.
class MockSpotlightEndpoint final : public MockServer {
public:
    explicit MockSpotlightEndpoint(std::vector<SpotlightEntry> dictionary);
    ~MockSpotlightEndpoint() override;

protected:
    MockReply handle(const MockRequest& request) override;

private:
    std::vector<SpotlightEntry> dictionary_;
};

/// `/embed` endpoint returning hashed bag-of-words vectors with a constant bias
/// component (never zero). Vectors are not normalized.
class MockEmbeddingEndpoint final : public MockServer {
public:
    explicit MockEmbeddingEndpoint(std::size_t dim = 64);
    ~MockEmbeddingEndpoint() override;

    std::size_t texts_embedded() const { return texts_; }
    std::size_t largest_batch() const { return largest_batch_; }
    /// When set, the reply declares and returns vectors of this wrong size for the 2nd text.
    void break_dimension(bool broken) { broken_ = broken; }
    /// When set, all-zero vectors are returned.
    void zero_vectors(bool zero) { zero_ = zero; }

    /// The vector the endpoint returns for `text`.
    std::vector<float> vector_for(const std::string& text) const;

protected:
    MockReply handle(const MockRequest& request) override;

private:
    std::size_t dim_;
    std::atomic<std::size_t> texts_{0};
    std::atomic<std::size_t> largest_batch_{0};
    std::atomic<bool> broken_{false};
    std::atomic<bool> zero_{false};
};

}  // namespace srtk::testkit
