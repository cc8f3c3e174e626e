#include "srtk/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "srtk/errors.hpp"

namespace srtk {

void ScoreRequest::validate() const {
    if (candidates.empty()) throw std::invalid_argument("score request without candidates");
    std::set<std::string_view> seen;
    for (const auto& c : candidates) {
        if (!seen.insert(c).second) throw std::invalid_argument("duplicate candidate '" + c + "'");
    }
}

// Lexical

std::vector<std::string> lexical_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

double token_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& token : a) common += b.count(token);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::set<std::string> token_set(std::string_view text) {
    auto tokens = lexical_tokens(text);
    return {tokens.begin(), tokens.end()};
}

}  // namespace

ScoredCandidates LexicalScorer::score(const ScoreRequest& request) {
    request.validate();
    const auto query = token_set(request.query);
    ScoredCandidates out;
    out.provenance = ScoreProvenance::lexical;
    out.scores.reserve(request.candidates.size());
    for (const auto& candidate : request.candidates) {
        out.scores.push_back(token_jaccard(query, token_set(candidate)));
    }
    return out;
}

// Embeddings

EmbeddingClient::EmbeddingClient(std::string_view base_url, std::size_t batch_size,
                                 HttpOptions options)
    : client_(base_url, options), batch_size_(batch_size) {
    if (batch_size_ == 0) throw ConfigError("embedding batch size must be >= 1");
}

std::vector<Embedding> EmbeddingClient::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw std::invalid_argument("embed() needs at least one text");
    std::vector<Embedding> vectors;
    vectors.reserve(texts.size());
    std::size_t dim = 0;
    for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
        const auto batch = texts.subspan(begin, std::min(batch_size_, texts.size() - begin));
        const nlohmann::json request = {
            {"texts", std::vector<std::string>(batch.begin(), batch.end())}};
        const auto response = client_.post(request.dump(), "application/json",
                                           {{"Accept", "application/json"}}, "/embed");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(response.body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProtocolError(std::string("embedding response is not JSON: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array()) {
            throw ProtocolError("embedding response lacks 'vectors'");
        }
        if (doc["vectors"].size() != batch.size()) {
            throw ProtocolError("embedding endpoint returned " +
                                std::to_string(doc["vectors"].size()) + " vectors for " +
                                std::to_string(batch.size()) + " texts");
        }
        for (const auto& row : doc["vectors"]) {
            if (!row.is_array() || row.empty()) throw ProtocolError("embedding row is not a vector");
            Embedding v;
            v.reserve(row.size());
            for (const auto& x : row) {
                if (!x.is_number()) throw ProtocolError("embedding entry is not a number");
                v.push_back(x.get<float>());
            }
            if (dim == 0) dim = v.size();
            if (v.size() != dim) throw ProtocolError("embedding dimension mismatch within a batch");
            double norm = 0.0;
            for (const float x : v) norm += static_cast<double>(x) * x;
            norm = std::sqrt(norm);
            if (!(norm > 0.0) || !std::isfinite(norm)) {
                throw ProtocolError("embedding endpoint returned a zero or non-finite vector");
            }
            for (float& x : v) x = static_cast<float>(x / norm);
            vectors.push_back(std::move(v));
        }
        if (doc.contains("dim") && doc["dim"].is_number_unsigned() &&
            doc["dim"].get<std::size_t>() != dim) {
            throw ProtocolError("embedding 'dim' disagrees with the vectors");
        }
    }
    return vectors;
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw ProtocolError("cosine of vectors with different dimensions");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

EmbeddingScorer::EmbeddingScorer(std::shared_ptr<EmbeddingClient> client)
    : client_(std::move(client)) {
    if (!client_) throw ConfigError("embedding scorer needs a client");
}

std::size_t EmbeddingScorer::cache_size() const {
    std::shared_lock lock(cache_mutex_);
    return cache_.size();
}

std::vector<Embedding> EmbeddingScorer::lookup(std::span<const std::string> texts) {
    std::vector<std::string> missing;
    {
        std::shared_lock lock(cache_mutex_);
        std::set<std::string_view> queued;
        for (const auto& text : texts) {
            if (!cache_.contains(text) && queued.insert(text).second) missing.push_back(text);
        }
    }
    if (!missing.empty()) {
        auto fetched = client_->embed(missing);
        std::unique_lock lock(cache_mutex_);
        for (std::size_t i = 0; i < missing.size(); ++i) {
            cache_.try_emplace(missing[i], std::move(fetched[i]));
        }
    }
    std::shared_lock lock(cache_mutex_);
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(cache_.at(text));
    return out;
}

ScoredCandidates EmbeddingScorer::score(const ScoreRequest& request) {
    request.validate();
    std::vector<std::string> texts;
    texts.reserve(request.candidates.size() + 1);
    texts.push_back(request.query);
    texts.insert(texts.end(), request.candidates.begin(), request.candidates.end());
    const auto vectors = lookup(texts);
    ScoredCandidates out;
    out.provenance = ScoreProvenance::embedding;
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        out.scores.push_back(cosine(vectors.front(), vectors[i]));
    }
    return out;
}

std::vector<double> softmax_log_probs(std::span<const double> scores, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (scores.empty()) return {};
    std::vector<double> scaled(scores.begin(), scores.end());
    for (double& s : scaled) s /= temperature;
    const double peak = *std::max_element(scaled.begin(), scaled.end());
    double total = 0.0;
    for (const double s : scaled) total += std::exp(s - peak);
    const double log_normalizer = peak + std::log(total);
    for (double& s : scaled) s -= log_normalizer;
    return scaled;
}

}  // namespace srtk
