#include "srtk/kgsource.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "srtk/errors.hpp"

namespace srtk {

namespace {

constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";

bool is_full_iri(std::string_view id) {
    return id.find("://") != std::string_view::npos || id.starts_with("urn:");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Uniform integer in [0, bound) by rejection; std distributions differ across libraries.
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
        draw = engine();
    } while (draw >= limit);
    return draw % bound;
}

}  // namespace

std::string_view to_string(KnowledgeGraph kg) {
    switch (kg) {
        case KnowledgeGraph::wikidata: return "wikidata";
        case KnowledgeGraph::freebase: return "freebase";
        case KnowledgeGraph::dbpedia: return "dbpedia";
        case KnowledgeGraph::custom: return "custom";
    }
    return "custom";
}

KnowledgeGraph knowledge_graph_from_string(std::string_view name) {
    if (name == "wikidata") return KnowledgeGraph::wikidata;
    if (name == "freebase") return KnowledgeGraph::freebase;
    if (name == "dbpedia") return KnowledgeGraph::dbpedia;
    if (name == "custom") return KnowledgeGraph::custom;
    throw ConfigError("unknown knowledge graph '" + std::string(name) + "'");
}

KnowledgeGraphProfile KnowledgeGraphProfile::builtin(KnowledgeGraph kg) {
    KnowledgeGraphProfile p;
    p.name = kg;
    p.label_predicate = kRdfsLabel;
    switch (kg) {
        case KnowledgeGraph::wikidata:
            p.sparql_endpoint = "https://query.wikidata.org/sparql";
            p.entity_prefix = "http://www.wikidata.org/entity/";
            p.relation_prefix = "http://www.wikidata.org/prop/direct/";
            p.relation_blocklist = {R"(^(?!http://www\.wikidata\.org/prop/direct/))"};
            break;
        case KnowledgeGraph::freebase:
            // No public Freebase endpoint exists; a local Virtuoso load is the usual setup.
            p.sparql_endpoint = "http://localhost:8890/sparql";
            p.entity_prefix = "http://rdf.freebase.com/ns/";
            p.relation_prefix = "http://rdf.freebase.com/ns/";
            p.label_predicate = "http://rdf.freebase.com/ns/type.object.name";
            p.relation_blocklist = {R"(^(?!http://rdf\.freebase\.com/ns/))",
                                    R"(^http://rdf\.freebase\.com/ns/(type|common)\.)"};
            break;
        case KnowledgeGraph::dbpedia:
            p.sparql_endpoint = "https://dbpedia.org/sparql";
            p.entity_prefix = "http://dbpedia.org/resource/";
            p.relation_prefix = "http://dbpedia.org/ontology/";
            p.relation_blocklist = {R"(^http://dbpedia\.org/ontology/wikiPageWikiLink$)",
                                    R"(^http://www\.w3\.org/)"};
            break;
        case KnowledgeGraph::custom:
            p.entity_prefix = "http://example.org/entity/";
            p.relation_prefix = "http://example.org/relation/";
            break;
    }
    return p;
}

void KnowledgeGraphProfile::validate() const {
    auto check_prefix = [](std::string_view field, const std::string& prefix) {
        if (prefix.empty() || (!prefix.ends_with('/') && !prefix.ends_with('#'))) {
            throw ConfigError(std::string(field) + " must end with '/' or '#': '" + prefix + "'");
        }
    };
    check_prefix("entity_prefix", entity_prefix);
    check_prefix("relation_prefix", relation_prefix);
    if (label_predicate.empty()) throw ConfigError("label_predicate is empty");
    if (request_timeout.count() <= 0) throw ConfigError("request_timeout must be positive");
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (min_request_interval.count() < 0) throw ConfigError("min_request_interval must be >= 0");
    if (max_in_flight == 0) throw ConfigError("max_in_flight must be >= 1");
    if (result_cap == 0) throw ConfigError("result_cap must be >= 1");
    for (const auto& pattern : relation_blocklist) {
        try {
            std::regex re(pattern);
        } catch (const std::regex_error& e) {
            throw ConfigError("invalid blocklist pattern '" + pattern + "': " + e.what());
        }
    }
}

std::string KnowledgeGraphProfile::shorten(std::string_view iri) const {
    // Longer prefix first so nested namespaces strip correctly.
    const std::string* first = &entity_prefix;
    const std::string* second = &relation_prefix;
    if (second->size() > first->size()) std::swap(first, second);
    for (const auto* prefix : {first, second}) {
        if (!prefix->empty() && iri.starts_with(*prefix) && iri.size() > prefix->size()) {
            return std::string(iri.substr(prefix->size()));
        }
    }
    return std::string(iri);
}

std::string KnowledgeGraphProfile::entity_iri(std::string_view id) const {
    if (is_full_iri(id)) return std::string(id);
    return entity_prefix + std::string(id);
}

std::string KnowledgeGraphProfile::relation_iri(std::string_view id) const {
    if (is_full_iri(id)) return std::string(id);
    return relation_prefix + std::string(id);
}

KnowledgeSource::KnowledgeSource(KnowledgeGraphProfile profile) : profile_(std::move(profile)) {
    for (const auto& pattern : profile_.relation_blocklist) {
        try {
            blocklist_.emplace_back(pattern, std::regex::ECMAScript | std::regex::optimize);
        } catch (const std::regex_error& e) {
            throw ConfigError("invalid blocklist pattern '" + pattern + "': " + e.what());
        }
    }
}

bool KnowledgeSource::is_blocked(std::string_view relation_id) const {
    if (blocklist_.empty()) return false;
    const auto iri = profile_.relation_iri(relation_id);
    return std::any_of(blocklist_.begin(), blocklist_.end(),
                       [&](const std::regex& re) { return std::regex_search(iri, re); });
}

std::vector<RelationId> KnowledgeSource::sample_negative_relations(
    const EntitySet& frontier, const std::optional<RelationId>& exclude, std::size_t n,
    std::uint64_t seed) {
    if (n == 0 || frontier.empty()) return {};
    std::vector<RelationId> pool;
    for (auto& relation : connected_relations(frontier)) {
        if (!exclude || relation != *exclude) pool.push_back(relation);
    }
    return seeded_sample(std::move(pool), n, seed);
}

std::vector<std::string> seeded_sample(std::vector<std::string> pool, std::size_t n,
                                       std::uint64_t seed) {
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    const std::size_t take = std::min(n, pool.size());
    std::mt19937_64 engine(seed);
    for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + bounded(engine, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    return pool;
}

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x5EED5EED5EED5EEDULL;
    for (const auto part : parts) state = splitmix64(state ^ splitmix64(part));
    return state;
}

}  // namespace srtk

namespace srtk {

std::string LabelCache::label(const std::string& id) {
    return labels({id}).at(id);
}

std::map<std::string, std::string> LabelCache::labels(const std::set<std::string>& ids) {
    std::set<std::string> missing;
    std::map<std::string, std::string> out;
    {
        std::lock_guard lock(mutex_);
        for (const auto& id : ids) {
            if (auto it = cache_.find(id); it != cache_.end()) {
                out.emplace(id, it->second);
            } else {
                missing.insert(id);
            }
        }
    }
    if (missing.empty()) return out;
    auto fetched = source_->fetch_labels(missing);
    std::lock_guard lock(mutex_);
    for (const auto& id : missing) {
        auto it = fetched.find(id);
        const auto& label = it != fetched.end() ? it->second : id;
        cache_.emplace(id, label);
        out.emplace(id, label);
    }
    return out;
}

}  // namespace srtk
