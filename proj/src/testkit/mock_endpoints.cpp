#include "srtk/testkit/mock_endpoints.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "srtk/scorer.hpp"
#include "srtk/sparql_source.hpp"
#include "srtk/utf8.hpp"

namespace srtk::testkit {

namespace {

std::string lower(std::string text) {
    for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return text;
}

std::string url_decode(std::string_view text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '+') {
            out.push_back(' ');
        } else if (text[i] == '%' && i + 2 < text.size()) {
            out.push_back(static_cast<char>(std::stoi(std::string(text.substr(i + 1, 2)), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

std::multimap<std::string, std::string> parse_form(std::string_view body) {
    std::multimap<std::string, std::string> out;
    std::size_t start = 0;
    while (start <= body.size()) {
        auto end = body.find('&', start);
        if (end == std::string_view::npos) end = body.size();
        const auto pair = body.substr(start, end - start);
        const auto eq = pair.find('=');
        if (!pair.empty()) {
            if (eq == std::string_view::npos) {
                out.emplace(url_decode(pair), "");
            } else {
                out.emplace(url_decode(pair.substr(0, eq)), url_decode(pair.substr(eq + 1)));
            }
        }
        start = end + 1;
    }
    return out;
}

std::size_t utf16_units(std::string_view text) {
    std::size_t units = 0;
    for (const char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if ((u & 0xC0) == 0x80) continue;
        units += u >= 0xF0 ? 2 : 1;
    }
    return units;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

MockReply json_reply(const nlohmann::json& doc) { return {200, doc.dump(), "application/json"}; }

MockReply bad_request(std::string message) { return {400, std::move(message), "text/plain"}; }

}  // namespace

std::string MockRequest::param(const std::string& key) const {
    const auto it = params.find(key);
    return it == params.end() ? std::string() : it->second;
}

std::string MockRequest::header(const std::string& key) const {
    const auto it = headers.find(lower(key));
    return it == headers.end() ? std::string() : it->second;
}

struct MockServer::Impl {
    httplib::Server server;
    std::thread thread;
};

MockServer::MockServer() : impl_(std::make_unique<Impl>()) {}

MockServer::~MockServer() { stop(); }

void MockServer::start() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        MockRequest request;
        request.method = req.method;
        request.path = req.path;
        request.body = req.body;
        request.params.insert(req.params.begin(), req.params.end());
        if (req.method == "POST" &&
            req.get_header_value("Content-Type").starts_with("application/x-www-form-urlencoded") &&
            req.params.empty()) {
            request.params = parse_form(req.body);
        }
        for (const auto& [key, value] : req.headers) request.headers.emplace(lower(key), value);
        const auto reply = dispatch(request);
        res.status = reply.status;
        res.set_content(reply.body, reply.content_type);
    };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("mock server could not bind a port");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void MockServer::stop() {
    if (!impl_) return;
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string MockServer::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

void MockServer::fail_next(std::size_t count, int status) {
    std::lock_guard lock(failure_mutex_);
    failures_left_ = count;
    failure_status_ = status;
}

void MockServer::fail_matching(std::string needle, int status) {
    std::lock_guard lock(failure_mutex_);
    failure_needles_.emplace_back(std::move(needle), status);
}

MockReply MockServer::dispatch(const MockRequest& request) {
    ++calls_;
    {
        std::lock_guard lock(failure_mutex_);
        if (failures_left_ > 0) {
            --failures_left_;
            return {failure_status_, "injected failure", "text/plain"};
        }
        for (const auto& [needle, status] : failure_needles_) {
            bool hit = request.body.find(needle) != std::string::npos;
            for (const auto& [key, value] : request.params) {
                hit = hit || value.find(needle) != std::string::npos;
            }
            if (hit) return {status, "injected failure", "text/plain"};
        }
    }
    try {
        return handle(request);
    } catch (const std::exception& e) {
        return bad_request(e.what());
    }
}

// SPARQL

namespace {

struct ParsedQuery {
    std::vector<std::string> vars;
    std::string values_var;
    std::vector<std::string> values;  // IRIs without brackets
    std::vector<std::string> body;
    std::size_t limit = 0;  // 0: none
};

std::optional<std::string> bracketed(const std::string& token) {
    if (token.size() < 2 || token.front() != '<' || token.back() != '>') return std::nullopt;
    return token.substr(1, token.size() - 2);
}

std::optional<ParsedQuery> parse_query(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;) tokens.push_back(t);
    std::size_t i = 0;
    auto expect = [&](std::string_view token) {
        if (i < tokens.size() && tokens[i] == token) {
            ++i;
            return true;
        }
        return false;
    };
    ParsedQuery q;
    if (!expect("SELECT") || !expect("DISTINCT")) return std::nullopt;
    while (i < tokens.size() && tokens[i] != "WHERE") q.vars.push_back(tokens[i++]);
    if (!expect("WHERE") || !expect("{") || !expect("VALUES") || i >= tokens.size()) return std::nullopt;
    q.values_var = tokens[i++];
    if (!expect("{")) return std::nullopt;
    while (i < tokens.size() && tokens[i] != "}") {
        const auto iri = bracketed(tokens[i++]);
        if (!iri) return std::nullopt;
        q.values.push_back(*iri);
    }
    if (!expect("}")) return std::nullopt;
    while (i < tokens.size() && tokens[i] != "}") q.body.push_back(tokens[i++]);
    if (!expect("}")) return std::nullopt;
    if (expect("ORDER")) {
        if (!expect("BY")) return std::nullopt;
        while (i < tokens.size() && tokens[i] != "LIMIT") ++i;
    }
    if (expect("LIMIT")) {
        if (i >= tokens.size()) return std::nullopt;
        q.limit = std::stoul(tokens[i++]);
    }
    if (i != tokens.size()) return std::nullopt;
    return q;
}

bool body_is(const std::vector<std::string>& body, std::initializer_list<std::string_view> shape) {
    if (body.size() != shape.size()) return false;
    std::size_t i = 0;
    for (const auto token : shape) {
        const auto& actual = body[i++];
        if (token == "<>") {
            if (!bracketed(actual)) return false;
        } else if (actual != token) {
            return false;
        }
    }
    return true;
}

sparql::Term uri(std::string value) { return {"uri", std::move(value), ""}; }

template <typename Row>
void apply_limit(std::vector<Row>& rows, std::size_t limit) {
    if (limit != 0 && rows.size() > limit) rows.resize(limit);
}

}  // namespace

MockSparqlEndpoint::MockSparqlEndpoint(TripleStoreFixture fixture, KnowledgeGraphProfile profile)
    : source_(std::move(fixture), profile), profile_(std::move(profile)) {
    start();
}

MockSparqlEndpoint::~MockSparqlEndpoint() { stop(); }

MockReply MockSparqlEndpoint::handle(const MockRequest& request) {
    if (request.path != "/sparql") return {404, "not found", "text/plain"};
    const auto text = request.param("query");
    const auto q = parse_query(text);
    if (!q) return bad_request("unsupported query: " + text);

    EntitySet values;
    for (const auto& iri : q->values) values.insert(profile_.shorten(iri));
    std::vector<std::string> vars;
    for (const auto& v : q->vars) vars.push_back(v.substr(1));
    std::vector<sparql::Binding> rows;

    auto single_column = [&](const std::string& var, std::vector<std::string> iris) {
        std::sort(iris.begin(), iris.end());
        iris.erase(std::unique(iris.begin(), iris.end()), iris.end());
        apply_limit(iris, q->limit);
        for (auto& iri : iris) rows.push_back({{var, uri(std::move(iri))}});
    };
    auto two_columns = [&](const std::string& a, const std::string& b,
                           std::vector<std::pair<std::string, std::string>> pairs) {
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        apply_limit(pairs, q->limit);
        for (auto& [x, y] : pairs) rows.push_back({{a, uri(std::move(x))}, {b, uri(std::move(y))}});
    };

    const auto& body = q->body;
    if (q->vars == std::vector<std::string>{"?r"} && q->values_var == "?e" &&
        body_is(body, {"?e", "?r", "?x", ".", "FILTER(isIRI(?x))"})) {
        std::vector<std::string> iris;
        for (const auto& r : source_.raw_relations(values)) iris.push_back(profile_.relation_iri(r));
        single_column("r", std::move(iris));
    } else if (q->vars == std::vector<std::string>{"?t"} && q->values_var == "?e" &&
               !body.empty() && body.back() == "FILTER(isIRI(?t))" && (body.size() - 1) % 4 == 0) {
        RelationPath path;
        std::string subject = "?e";
        const std::size_t hops = (body.size() - 1) / 4;
        for (std::size_t h = 0; h < hops; ++h) {
            const std::string object = h + 1 == hops ? "?t" : "?m" + std::to_string(h + 1);
            const auto relation = bracketed(body[4 * h + 1]);
            if (body[4 * h] != subject || !relation || body[4 * h + 2] != object ||
                body[4 * h + 3] != ".") {
                return bad_request("unsupported query: " + text);
            }
            path.push_back(profile_.shorten(*relation));
            subject = object;
        }
        std::vector<std::string> iris;
        for (const auto& e : source_.raw_terminals(values, path)) iris.push_back(profile_.entity_iri(e));
        single_column("t", std::move(iris));
    } else if (q->vars == std::vector<std::string>{"?s", "?o"} &&
               body_is(body, {"?s", "<>", "?o", ".", "FILTER(isIRI(?o))"})) {
        const auto relation = profile_.shorten(*bracketed(body[1]));
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& [s, o] : source_.raw_edges(values, relation)) {
            pairs.emplace_back(profile_.entity_iri(s), profile_.entity_iri(o));
        }
        two_columns("s", "o", std::move(pairs));
    } else if (q->vars == std::vector<std::string>{"?r"} && q->values_var == "?a" &&
               body_is(body, {"<>", "?r", "?a", "."})) {
        const auto source = profile_.shorten(*bracketed(body[0]));
        std::vector<std::string> iris;
        for (const auto& p : source_.raw_paths(source, values, 1)) {
            iris.push_back(profile_.relation_iri(p[0]));
        }
        single_column("r", std::move(iris));
    } else if (q->vars == std::vector<std::string>{"?r1", "?r2"} &&
               body_is(body, {"<>", "?r1", "?m", ".", "?m", "?r2", "?a", ".", "FILTER(isIRI(?m))"})) {
        const auto source = profile_.shorten(*bracketed(body[0]));
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& p : source_.raw_paths(source, values, 2)) {
            pairs.emplace_back(profile_.relation_iri(p[0]), profile_.relation_iri(p[1]));
        }
        two_columns("r1", "r2", std::move(pairs));
    } else if (q->vars == std::vector<std::string>{"?e", "?label"} &&
               body_is(body, {"?e", "<>", "?label", ".", "FILTER(LANG(?label)", "=", "\"en\")"})) {
        ++label_queries_;
        if (*bracketed(body[1]) == profile_.label_predicate) {
            for (const auto& iri : q->values) {
                const auto it = source_.fixture().labels.find(profile_.shorten(iri));
                if (it == source_.fixture().labels.end()) continue;
                rows.push_back({{"e", uri(iri)}, {"label", {"literal", it->second, "en"}}});
            }
        }
    } else {
        return bad_request("unsupported query: " + text);
    }
    return {200, sparql::write_results(vars, rows), "application/sparql-results+json"};
}

// REL

MockRelEndpoint::MockRelEndpoint(std::vector<std::pair<std::string, std::string>> dictionary,
                                 std::optional<std::string> required_token)
    : dictionary_(std::move(dictionary)), token_(std::move(required_token)) {
    start();
}

MockRelEndpoint::~MockRelEndpoint() { stop(); }

MockReply MockRelEndpoint::handle(const MockRequest& request) {
    if (token_ && request.header("Authorization") != *token_) {
        return {401, "unauthorized", "text/plain"};
    }
    const auto doc = nlohmann::json::parse(request.body);
    const auto text = doc.at("text").get<std::string>();
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [surface, title] : dictionary_) {
        for (auto pos = text.find(surface); pos != std::string::npos;
             pos = text.find(surface, pos + 1)) {
            rows.push_back({utf8::length(text.substr(0, pos)), utf8::length(surface), surface, title,
                            0.9, 0.9, "NER"});
        }
    }
    return json_reply(rows);
}

// Spotlight

MockSpotlightEndpoint::MockSpotlightEndpoint(std::vector<SpotlightEntry> dictionary)
    : dictionary_(std::move(dictionary)) {
    start();
}

MockSpotlightEndpoint::~MockSpotlightEndpoint() { stop(); }

MockReply MockSpotlightEndpoint::handle(const MockRequest& request) {
    const auto text = request.param("text");
    const double confidence = std::stod(request.param("confidence").empty()
                                            ? std::string("0.5")
                                            : request.param("confidence"));
    nlohmann::json doc = {{"@text", text}, {"@confidence", request.param("confidence")}};
    nlohmann::json resources = nlohmann::json::array();
    for (const auto& entry : dictionary_) {
        if (entry.score < confidence) continue;
        for (auto pos = text.find(entry.surface); pos != std::string::npos;
             pos = text.find(entry.surface, pos + 1)) {
            resources.push_back({{"@URI", entry.uri},
                                 {"@support", "10"},
                                 {"@types", ""},
                                 {"@surfaceForm", entry.surface},
                                 {"@offset", std::to_string(utf16_units(text.substr(0, pos)))},
                                 {"@similarityScore", std::to_string(entry.score)},
                                 {"@percentageOfSecondRank", "0.0"}});
        }
    }
    if (!resources.empty()) doc["Resources"] = resources;
    return json_reply(doc);
}

// Embedding

MockEmbeddingEndpoint::MockEmbeddingEndpoint(std::size_t dim) : dim_(dim) {
    if (dim_ < 2) throw std::invalid_argument("embedding mock needs dim >= 2");
    start();
}

MockEmbeddingEndpoint::~MockEmbeddingEndpoint() { stop(); }

std::vector<float> MockEmbeddingEndpoint::vector_for(const std::string& text) const {
    std::vector<float> v(dim_, 0.0f);
    if (zero_) return v;
    for (const auto& token : lexical_tokens(text)) v[fnv1a(token) % (dim_ - 1)] += 1.0f;
    v[dim_ - 1] = 0.5f;
    return v;
}

MockReply MockEmbeddingEndpoint::handle(const MockRequest& request) {
    if (request.method != "POST" || request.path != "/embed") return {404, "not found", "text/plain"};
    const auto doc = nlohmann::json::parse(request.body);
    const auto texts = doc.at("texts").get<std::vector<std::string>>();
    texts_ += texts.size();
    for (auto seen = largest_batch_.load(); texts.size() > seen &&
                                            !largest_batch_.compare_exchange_weak(seen, texts.size());) {
    }
    nlohmann::json vectors = nlohmann::json::array();
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto v = vector_for(texts[i]);
        if (broken_ && i == 1) v.pop_back();
        vectors.push_back(v);
    }
    return json_reply({{"vectors", vectors}, {"dim", dim_}});
}

}  // namespace srtk::testkit
