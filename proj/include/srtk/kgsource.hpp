#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srtk/kgdata.hpp"

namespace srtk {

enum class KnowledgeGraph { wikidata, freebase, dbpedia, custom };

std::string_view to_string(KnowledgeGraph kg);
/// Throws ConfigError for unknown names.
KnowledgeGraph knowledge_graph_from_string(std::string_view name);

/// Per-graph access settings. Identifiers in records are short forms (`Q17`, `P31`);
/// full IRIs are rebuilt from the prefixes when a query is issued.
struct KnowledgeGraphProfile {
    KnowledgeGraph name = KnowledgeGraph::custom;
    std::string sparql_endpoint;
    std::string entity_prefix;
    std::string relation_prefix;
    std::string label_predicate;
    /// ECMAScript patterns matched against full relation IRIs.
    std::vector<std::string> relation_blocklist;
    std::chrono::milliseconds request_timeout{60'000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};
    std::chrono::milliseconds min_request_interval{0};
    std::size_t max_in_flight = 4;
    /// Maximum bindings kept per query; larger answers are truncated in IRI order.
    std::size_t result_cap = 2000;

    static KnowledgeGraphProfile builtin(KnowledgeGraph kg);

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    std::string shorten(std::string_view iri) const;
    std::string entity_iri(std::string_view id) const;
    std::string relation_iri(std::string_view id) const;
};

/// Longest relation sequence accepted by terminal_entities().
inline constexpr std::size_t kMaxPathHops = 4;

/// Graph queries needed by linking, retrieval and preprocessing. Only outgoing
/// edges whose object is an entity are ever followed. Implementations are
/// shareable across threads.
class KnowledgeSource {
public:
    explicit KnowledgeSource(KnowledgeGraphProfile profile);
    virtual ~KnowledgeSource() = default;

    KnowledgeSource(const KnowledgeSource&) = delete;
    KnowledgeSource& operator=(const KnowledgeSource&) = delete;

    /// Distinct non-blocklisted predicates leaving any of `entities` towards an entity.
    virtual std::set<RelationId> connected_relations(const EntitySet& entities) = 0;

    /// Entities reached from `sources` by following exactly `path`. The empty path
    /// returns `sources`.
    virtual EntitySet terminal_entities(const EntitySet& sources,
                                        std::span<const RelationId> path) = 0;

    /// All 1-hop relation paths from `source` into `answers`; when there are none,
    /// all 2-hop paths (only if max_hop is 2). Sorted and deduplicated.
    virtual std::vector<RelationPath> shortest_paths(const EntityId& source,
                                                     const EntitySet& answers, int max_hop) = 0;

    /// (subject, object) pairs of `relation` edges leaving `subjects`.
    virtual std::vector<std::pair<EntityId, EntityId>> edges(const EntitySet& subjects,
                                                             const RelationId& relation) = 0;

    /// Label for every input id ("en" preferred); unlabeled ids map to their bare form.
    virtual std::map<std::string, std::string> fetch_labels(const std::set<std::string>& ids) = 0;

    /// Up to `n` distinct relations leaving `frontier`, never `exclude`, in an order
    /// fixed by `seed`. Returns every candidate when fewer than `n` exist.
    virtual std::vector<RelationId> sample_negative_relations(const EntitySet& frontier,
                                                              const std::optional<RelationId>& exclude,
                                                              std::size_t n, std::uint64_t seed);

    const KnowledgeGraphProfile& profile() const { return profile_; }

protected:
    bool is_blocked(std::string_view relation_id) const;

private:
    KnowledgeGraphProfile profile_;
    std::vector<std::regex> blocklist_;
};

/// Seeded selection of `n` items (partial Fisher-Yates over a sorted pool), stable
/// across platforms. A prefix of a larger draw with the same seed equals the smaller draw.
std::vector<std::string> seeded_sample(std::vector<std::string> pool, std::size_t n,
                                       std::uint64_t seed);

/// Deterministic mixing of several integers into one seed.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace srtk

#include <mutex>

namespace srtk {

/// Memoizing front for KnowledgeSource::fetch_labels. Thread-safe.
class LabelCache {
public:
    explicit LabelCache(KnowledgeSource& source) : source_(&source) {}

    std::string label(const std::string& id);
    std::map<std::string, std::string> labels(const std::set<std::string>& ids);

private:
    KnowledgeSource* source_;
    std::mutex mutex_;
    std::map<std::string, std::string> cache_;
};

}  // namespace srtk
