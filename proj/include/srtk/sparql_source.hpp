#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srtk/http.hpp"
#include "srtk/kgsource.hpp"

namespace srtk {

namespace sparql {

struct Term {
    std::string type;  // "uri", "literal", "bnode", "typed-literal"
    std::string value;
    std::string lang;

    bool operator==(const Term&) const = default;
};

using Binding = std::map<std::string, Term>;

/// Wraps an IRI in angle brackets; throws FormatError if it contains forbidden characters.
std::string iri_ref(std::string_view iri);

// Query templates. `limit` is the LIMIT clause value (0 omits it).
std::string relations_query(std::span<const std::string> entity_iris, std::size_t limit);
std::string terminals_query(std::span<const std::string> source_iris,
                            std::span<const std::string> relation_iris, std::size_t limit);
std::string edges_query(std::span<const std::string> subject_iris, std::string_view relation_iri,
                        std::size_t limit);
std::string one_hop_query(std::string_view source_iri, std::span<const std::string> answer_iris,
                          std::size_t limit);
std::string two_hop_query(std::string_view source_iri, std::span<const std::string> answer_iris,
                          std::size_t limit);
std::string labels_query(std::span<const std::string> iris, std::string_view label_predicate,
                         std::string_view language);

/// Parses a SPARQL 1.1 JSON results document. Throws ProtocolError.
std::vector<Binding> parse_results(std::string_view body);
/// Serializes bindings as a SPARQL 1.1 JSON results document.
std::string write_results(std::span<const std::string> vars, std::span<const Binding> rows);

}  // namespace sparql

/// KnowledgeSource speaking the SPARQL 1.1 protocol (POST form, JSON results).
class SparqlSource final : public KnowledgeSource {
public:
    explicit SparqlSource(KnowledgeGraphProfile profile);

    std::set<RelationId> connected_relations(const EntitySet& entities) override;
    EntitySet terminal_entities(const EntitySet& sources,
                                std::span<const RelationId> path) override;
    std::vector<RelationPath> shortest_paths(const EntityId& source, const EntitySet& answers,
                                             int max_hop) override;
    std::vector<std::pair<EntityId, EntityId>> edges(const EntitySet& subjects,
                                                     const RelationId& relation) override;
    std::map<std::string, std::string> fetch_labels(const std::set<std::string>& ids) override;

    /// Runs a SELECT query and returns its bindings.
    std::vector<sparql::Binding> select(const std::string& query);

private:
    std::vector<std::string> entity_iris(const EntitySet& ids) const;
    std::string value_of(const sparql::Binding& row, const std::string& var) const;
    void cap(std::size_t& count, std::string_view what) const;

    HttpClient client_;
};

}  // namespace srtk
