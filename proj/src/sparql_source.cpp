#include "srtk/sparql_source.hpp"

#include <algorithm>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "srtk/errors.hpp"

namespace srtk {

namespace sparql {

namespace {

std::string values_block(std::string_view var, std::span<const std::string> iris) {
    std::string out = "VALUES ?" + std::string(var) + " {";
    for (const auto& iri : iris) out += " " + iri_ref(iri);
    out += " }";
    return out;
}

std::string limit_clause(std::size_t limit) {
    return limit == 0 ? std::string() : " LIMIT " + std::to_string(limit);
}

}  // namespace

std::string iri_ref(std::string_view iri) {
    for (const char c : iri) {
        const auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
            c == '^' || c == '`' || c == '\\') {
            throw FormatError("identifier cannot be used in a query: '" + std::string(iri) + "'");
        }
    }
    return "<" + std::string(iri) + ">";
}

std::string relations_query(std::span<const std::string> entity_iris, std::size_t limit) {
    return "SELECT DISTINCT ?r WHERE { " + values_block("e", entity_iris) +
           " ?e ?r ?x . FILTER(isIRI(?x)) } ORDER BY ?r" + limit_clause(limit);
}

std::string terminals_query(std::span<const std::string> source_iris,
                            std::span<const std::string> relation_iris, std::size_t limit) {
    if (relation_iris.empty()) throw std::invalid_argument("terminals query needs a relation");
    std::string body = values_block("e", source_iris);
    std::string subject = "?e";
    for (std::size_t i = 0; i < relation_iris.size(); ++i) {
        const bool last = i + 1 == relation_iris.size();
        const std::string object = last ? "?t" : "?m" + std::to_string(i + 1);
        body += " " + subject + " " + iri_ref(relation_iris[i]) + " " + object + " .";
        subject = object;
    }
    return "SELECT DISTINCT ?t WHERE { " + body + " FILTER(isIRI(?t)) } ORDER BY ?t" +
           limit_clause(limit);
}

std::string edges_query(std::span<const std::string> subject_iris, std::string_view relation_iri,
                        std::size_t limit) {
    return "SELECT DISTINCT ?s ?o WHERE { " + values_block("s", subject_iris) + " ?s " +
           iri_ref(relation_iri) + " ?o . FILTER(isIRI(?o)) } ORDER BY ?s ?o" +
           limit_clause(limit);
}

std::string one_hop_query(std::string_view source_iri, std::span<const std::string> answer_iris,
                          std::size_t limit) {
    return "SELECT DISTINCT ?r WHERE { " + values_block("a", answer_iris) + " " +
           iri_ref(source_iri) + " ?r ?a . } ORDER BY ?r" + limit_clause(limit);
}

std::string two_hop_query(std::string_view source_iri, std::span<const std::string> answer_iris,
                          std::size_t limit) {
    return "SELECT DISTINCT ?r1 ?r2 WHERE { " + values_block("a", answer_iris) + " " +
           iri_ref(source_iri) + " ?r1 ?m . ?m ?r2 ?a . FILTER(isIRI(?m)) } ORDER BY ?r1 ?r2" +
           limit_clause(limit);
}

std::string labels_query(std::span<const std::string> iris, std::string_view label_predicate,
                         std::string_view language) {
    return "SELECT DISTINCT ?e ?label WHERE { " + values_block("e", iris) + " ?e " +
           iri_ref(label_predicate) + " ?label . FILTER(LANG(?label) = \"" +
           std::string(language) + "\") }";
}

std::vector<Binding> parse_results(std::string_view body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("SPARQL response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_object() ||
        !doc["results"].contains("bindings") || !doc["results"]["bindings"].is_array()) {
        throw ProtocolError("SPARQL response lacks results.bindings");
    }
    std::vector<Binding> rows;
    for (const auto& row : doc["results"]["bindings"]) {
        if (!row.is_object()) throw ProtocolError("SPARQL binding is not an object");
        Binding binding;
        for (const auto& [var, term] : row.items()) {
            if (!term.is_object() || !term.contains("type") || !term.contains("value") ||
                !term["type"].is_string() || !term["value"].is_string()) {
                throw ProtocolError("SPARQL term for ?" + var + " is malformed");
            }
            Term t{term["type"].get<std::string>(), term["value"].get<std::string>(), {}};
            if (term.contains("xml:lang") && term["xml:lang"].is_string()) {
                t.lang = term["xml:lang"].get<std::string>();
            }
            binding.emplace(var, std::move(t));
        }
        rows.push_back(std::move(binding));
    }
    return rows;
}

std::string write_results(std::span<const std::string> vars, std::span<const Binding> rows) {
    nlohmann::json bindings = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json object = nlohmann::json::object();
        for (const auto& [var, term] : row) {
            nlohmann::json t = {{"type", term.type}, {"value", term.value}};
            if (!term.lang.empty()) t["xml:lang"] = term.lang;
            object[var] = std::move(t);
        }
        bindings.push_back(std::move(object));
    }
    nlohmann::json doc = {{"head", {{"vars", vars}}}, {"results", {{"bindings", bindings}}}};
    return doc.dump();
}

}  // namespace sparql

namespace {

HttpOptions http_options(const KnowledgeGraphProfile& profile) {
    HttpOptions options;
    options.timeout = profile.request_timeout;
    options.max_retries = profile.max_retries;
    options.retry_backoff = profile.retry_backoff;
    options.min_request_interval = profile.min_request_interval;
    options.max_in_flight = profile.max_in_flight;
    return options;
}

constexpr std::size_t kLabelBatch = 200;

}  // namespace

SparqlSource::SparqlSource(KnowledgeGraphProfile profile)
    : KnowledgeSource(std::move(profile)),
      client_((this->profile().sparql_endpoint.empty()
                   ? throw ConfigError("no SPARQL endpoint configured")
                   : this->profile().sparql_endpoint),
              http_options(this->profile())) {}

std::vector<sparql::Binding> SparqlSource::select(const std::string& query) {
    spdlog::debug("SPARQL: {}", query);
    const auto response =
        client_.post("query=" + url_encode(query), "application/x-www-form-urlencoded",
                     {{"Accept", "application/sparql-results+json"}});
    return sparql::parse_results(response.body);
}

std::vector<std::string> SparqlSource::entity_iris(const EntitySet& ids) const {
    std::vector<std::string> iris;
    iris.reserve(ids.size());
    for (const auto& id : ids) iris.push_back(profile().entity_iri(id));
    return iris;
}

std::string SparqlSource::value_of(const sparql::Binding& row, const std::string& var) const {
    const auto it = row.find(var);
    if (it == row.end()) throw ProtocolError("SPARQL row lacks ?" + var);
    return profile().shorten(it->second.value);
}

void SparqlSource::cap(std::size_t& count, std::string_view what) const {
    if (count > profile().result_cap) {
        spdlog::warn("{}: more than {} results, truncated", what, profile().result_cap);
        count = profile().result_cap;
    }
}

std::set<RelationId> SparqlSource::connected_relations(const EntitySet& entities) {
    if (entities.empty()) return {};
    const auto iris = entity_iris(entities);
    const auto rows = select(sparql::relations_query(iris, profile().result_cap + 1));
    std::size_t count = rows.size();
    cap(count, "connected relations");
    std::set<RelationId> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto relation = value_of(rows[i], "r");
        if (!is_blocked(relation)) out.insert(std::move(relation));
    }
    return out;
}

EntitySet SparqlSource::terminal_entities(const EntitySet& sources,
                                          std::span<const RelationId> path) {
    if (path.size() > kMaxPathHops) throw std::invalid_argument("path longer than supported");
    if (path.empty()) return sources;
    if (sources.empty()) return {};
    std::vector<std::string> relation_iris;
    for (const auto& r : path) relation_iris.push_back(profile().relation_iri(r));
    const auto rows = select(
        sparql::terminals_query(entity_iris(sources), relation_iris, profile().result_cap + 1));
    std::size_t count = rows.size();
    cap(count, "terminal entities");
    EntitySet out;
    for (std::size_t i = 0; i < count; ++i) out.insert(value_of(rows[i], "t"));
    return out;
}

std::vector<RelationPath> SparqlSource::shortest_paths(const EntityId& source,
                                                       const EntitySet& answers, int max_hop) {
    if (max_hop < 1 || max_hop > 2) throw std::invalid_argument("max_hop must be 1 or 2");
    if (answers.empty()) throw std::invalid_argument("answers must be non-empty");
    const auto source_iri = profile().entity_iri(source);
    const auto answer_iris = entity_iris(answers);
    for (int hops = 1; hops <= max_hop; ++hops) {
        const auto rows =
            select(hops == 1 ? sparql::one_hop_query(source_iri, answer_iris, profile().result_cap + 1)
                             : sparql::two_hop_query(source_iri, answer_iris, profile().result_cap + 1));
        std::size_t count = rows.size();
        cap(count, "path search");
        std::set<RelationPath> paths;
        for (std::size_t i = 0; i < count; ++i) {
            RelationPath path = hops == 1 ? RelationPath{value_of(rows[i], "r")}
                                          : RelationPath{value_of(rows[i], "r1"),
                                                         value_of(rows[i], "r2")};
            if (std::none_of(path.begin(), path.end(),
                             [&](const auto& r) { return is_blocked(r); })) {
                paths.insert(std::move(path));
            }
        }
        if (!paths.empty()) return {paths.begin(), paths.end()};
    }
    return {};
}

std::vector<std::pair<EntityId, EntityId>> SparqlSource::edges(const EntitySet& subjects,
                                                               const RelationId& relation) {
    if (subjects.empty()) return {};
    const auto rows = select(sparql::edges_query(entity_iris(subjects),
                                                 profile().relation_iri(relation),
                                                 profile().result_cap + 1));
    std::size_t count = rows.size();
    cap(count, "edges");
    std::vector<std::pair<EntityId, EntityId>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.emplace_back(value_of(rows[i], "s"), value_of(rows[i], "o"));
    }
    return out;
}

std::map<std::string, std::string> SparqlSource::fetch_labels(const std::set<std::string>& ids) {
    std::map<std::string, std::string> out;
    const std::vector<std::string> all(ids.begin(), ids.end());
    for (std::size_t begin = 0; begin < all.size(); begin += kLabelBatch) {
        const auto end = std::min(all.size(), begin + kLabelBatch);
        // Properties carry labels under the entity namespace on some graphs (Wikidata)
        // and under the relation namespace on others (DBpedia), so ask for both.
        std::vector<std::string> iris;
        std::map<std::string, std::string> id_of;
        for (std::size_t i = begin; i < end; ++i) {
            for (auto iri : {profile().entity_iri(all[i]), profile().relation_iri(all[i])}) {
                if (id_of.emplace(iri, all[i]).second) iris.push_back(std::move(iri));
            }
        }
        std::map<std::string, std::string> found;
        for (const auto& row : select(sparql::labels_query(iris, profile().label_predicate, "en"))) {
            const auto e = row.find("e");
            const auto label = row.find("label");
            if (e == row.end() || label == row.end()) throw ProtocolError("label row incomplete");
            const auto id = id_of.find(e->second.value);
            if (id == id_of.end()) continue;
            auto [it, inserted] = found.emplace(id->second, label->second.value);
            if (!inserted && label->second.value < it->second) it->second = label->second.value;
        }
        for (std::size_t i = begin; i < end; ++i) {
            const auto it = found.find(all[i]);
            out[all[i]] = it != found.end() ? it->second : profile().shorten(all[i]);
        }
    }
    return out;
}

}  // namespace srtk
