#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "srtk/kgsource.hpp"

namespace srtk {

/// Small graph held in memory. Text format, one statement per line:
///
///     subject predicate object [label of subject...]
///     @label id label text...
///     # comment
struct TripleStoreFixture {
    std::set<Triple> triples;
    std::map<std::string, std::string> labels;

    static TripleStoreFixture parse(std::istream& in);
    static TripleStoreFixture load(const std::filesystem::path& path);
    void write(std::ostream& out) const;

    /// Every labeled id must occur in some triple; throws FormatError otherwise.
    void validate() const;
};

/// KnowledgeSource over a fixture. Immutable after construction, so concurrent use is safe.
class InMemorySource final : public KnowledgeSource {
public:
    InMemorySource(TripleStoreFixture fixture, KnowledgeGraphProfile profile);

    std::set<RelationId> connected_relations(const EntitySet& entities) override;
    EntitySet terminal_entities(const EntitySet& sources,
                                std::span<const RelationId> path) override;
    std::vector<RelationPath> shortest_paths(const EntityId& source, const EntitySet& answers,
                                             int max_hop) override;
    std::vector<std::pair<EntityId, EntityId>> edges(const EntitySet& subjects,
                                                     const RelationId& relation) override;
    std::map<std::string, std::string> fetch_labels(const std::set<std::string>& ids) override;

    const TripleStoreFixture& fixture() const { return fixture_; }

    // Uncapped, unfiltered primitives; also used by the mock SPARQL endpoint.
    std::vector<RelationId> raw_relations(const EntitySet& entities) const;
    std::vector<EntityId> raw_terminals(const EntitySet& sources,
                                        std::span<const RelationId> path) const;
    std::vector<RelationPath> raw_paths(const EntityId& source, const EntitySet& answers,
                                        int hops) const;
    std::vector<std::pair<EntityId, EntityId>> raw_edges(const EntitySet& subjects,
                                                         const RelationId& relation) const;

private:
    using Adjacency = std::multimap<RelationId, EntityId>;

    TripleStoreFixture fixture_;
    std::unordered_map<EntityId, Adjacency> outgoing_;
};

}  // namespace srtk
