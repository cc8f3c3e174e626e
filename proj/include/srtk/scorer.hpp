#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "srtk/http.hpp"

namespace srtk {

/// Query text (question, separator, labels of the relations so far) and the
/// candidate next-relation labels, END included.
struct ScoreRequest {
    std::string query;
    std::vector<std::string> candidates;

    /// Throws std::invalid_argument for empty or duplicated candidates.
    void validate() const;
};

enum class ScoreProvenance { embedding, lexical, oracle };

struct ScoredCandidates {
    std::vector<double> scores;
    ScoreProvenance provenance = ScoreProvenance::lexical;
};

/// Similarity between a query and its candidates; higher is better.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual ScoredCandidates score(const ScoreRequest& request) = 0;
};

/// Lowercased ASCII-alphanumeric tokens; bytes >= 0x80 count as word characters.
std::vector<std::string> lexical_tokens(std::string_view text);

/// Jaccard overlap of lowercased token sets. Pure, no I/O.
class LexicalScorer final : public Scorer {
public:
    ScoredCandidates score(const ScoreRequest& request) override;
};

using Embedding = std::vector<float>;

/// Client for the `/embed` wire protocol:
/// POST {"texts": [...]} -> {"vectors": [[...], ...], "dim": d}.
class EmbeddingClient {
public:
    static constexpr std::size_t kDefaultBatchSize = 128;

    EmbeddingClient(std::string_view base_url, std::size_t batch_size = kDefaultBatchSize,
                    HttpOptions options = {});

    /// One unit-norm vector per text, in order. Throws ProtocolError on dimension
    /// mismatch or a zero vector, TransportError when the endpoint is unreachable.
    std::vector<Embedding> embed(std::span<const std::string> texts);

    std::size_t batch_size() const { return batch_size_; }

private:
    HttpClient client_;
    std::size_t batch_size_;
};

double cosine(std::span<const float> a, std::span<const float> b);

/// Cosine similarity between embedding-endpoint vectors, with a thread-safe
/// per-text cache so every distinct text is fetched once.
class EmbeddingScorer final : public Scorer {
public:
    explicit EmbeddingScorer(std::shared_ptr<EmbeddingClient> client);

    ScoredCandidates score(const ScoreRequest& request) override;

    std::size_t cache_size() const;

private:
    std::vector<Embedding> lookup(std::span<const std::string> texts);

    std::shared_ptr<EmbeddingClient> client_;
    mutable std::shared_mutex cache_mutex_;
    std::unordered_map<std::string, Embedding> cache_;
};

/// log_softmax(scores / temperature). Requires temperature > 0.
std::vector<double> softmax_log_probs(std::span<const double> scores, double temperature = 1.0);

}  // namespace srtk
