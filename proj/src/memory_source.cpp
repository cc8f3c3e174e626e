#include "srtk/memory_source.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "source_util.hpp"
#include "srtk/errors.hpp"

namespace srtk {

// TripleStoreFixture

TripleStoreFixture TripleStoreFixture::parse(std::istream& in) {
    TripleStoreFixture fixture;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first) || first.starts_with('#')) continue;

        auto rest_of_line = [&] {
            std::string text;
            std::getline(fields >> std::ws, text);
            return text;
        };
        if (first == "@label") {
            std::string id;
            if (!(fields >> id)) {
                throw FormatError("fixture line " + std::to_string(line_number) +
                                  ": @label needs an id");
            }
            fixture.labels[id] = rest_of_line();
            continue;
        }
        std::string predicate, object;
        if (!(fields >> predicate >> object)) {
            throw FormatError("fixture line " + std::to_string(line_number) +
                              ": expected 'subject predicate object [label]'");
        }
        fixture.triples.insert({first, predicate, object});
        if (auto label = rest_of_line(); !label.empty()) fixture.labels[first] = label;
    }
    fixture.validate();
    return fixture;
}

TripleStoreFixture TripleStoreFixture::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open fixture " + path.string());
    return parse(in);
}

void TripleStoreFixture::write(std::ostream& out) const {
    for (const auto& t : triples) out << t.subject << ' ' << t.predicate << ' ' << t.object << '\n';
    for (const auto& [id, label] : labels) out << "@label " << id << ' ' << label << '\n';
}

void TripleStoreFixture::validate() const {
    std::set<std::string> used;
    for (const auto& t : triples) {
        used.insert(t.subject);
        used.insert(t.predicate);
        used.insert(t.object);
    }
    for (const auto& [id, label] : labels) {
        if (!used.contains(id)) throw FormatError("fixture labels '" + id + "' which occurs in no triple");
    }
}

// InMemorySource

InMemorySource::InMemorySource(TripleStoreFixture fixture, KnowledgeGraphProfile profile)
    : KnowledgeSource(std::move(profile)), fixture_(std::move(fixture)) {
    for (const auto& t : fixture_.triples) outgoing_[t.subject].emplace(t.predicate, t.object);
}

std::vector<RelationId> InMemorySource::raw_relations(const EntitySet& entities) const {
    std::vector<RelationId> out;
    for (const auto& entity : entities) {
        const auto it = outgoing_.find(entity);
        if (it == outgoing_.end()) continue;
        for (const auto& [relation, object] : it->second) out.push_back(relation);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<EntityId> InMemorySource::raw_terminals(const EntitySet& sources,
                                                    std::span<const RelationId> path) const {
    EntitySet frontier = sources;
    for (const auto& relation : path) {
        EntitySet next;
        for (const auto& entity : frontier) {
            const auto it = outgoing_.find(entity);
            if (it == outgoing_.end()) continue;
            auto [first, last] = it->second.equal_range(relation);
            for (; first != last; ++first) next.insert(first->second);
        }
        frontier = std::move(next);
    }
    return {frontier.begin(), frontier.end()};
}

std::vector<RelationPath> InMemorySource::raw_paths(const EntityId& source,
                                                    const EntitySet& answers, int hops) const {
    std::set<RelationPath> paths;
    const auto it = outgoing_.find(source);
    if (it == outgoing_.end()) return {};
    for (const auto& [r1, middle] : it->second) {
        if (hops == 1) {
            if (answers.contains(middle)) paths.insert({r1});
            continue;
        }
        const auto next = outgoing_.find(middle);
        if (next == outgoing_.end()) continue;
        for (const auto& [r2, target] : next->second) {
            if (answers.contains(target)) paths.insert({r1, r2});
        }
    }
    return {paths.begin(), paths.end()};
}

std::vector<std::pair<EntityId, EntityId>> InMemorySource::raw_edges(
    const EntitySet& subjects, const RelationId& relation) const {
    std::vector<std::pair<EntityId, EntityId>> out;
    for (const auto& subject : subjects) {
        const auto it = outgoing_.find(subject);
        if (it == outgoing_.end()) continue;
        auto [first, last] = it->second.equal_range(relation);
        for (; first != last; ++first) out.emplace_back(subject, first->second);
    }
    return out;
}

std::set<RelationId> InMemorySource::connected_relations(const EntitySet& entities) {
    if (entities.empty()) return {};
    auto relations = raw_relations(entities);
    detail::truncate_sorted(
        relations, [&](const RelationId& r) { return profile().relation_iri(r); },
        profile().result_cap, "connected relations");
    std::set<RelationId> out;
    for (auto& r : relations) {
        if (!is_blocked(r)) out.insert(std::move(r));
    }
    return out;
}

EntitySet InMemorySource::terminal_entities(const EntitySet& sources,
                                            std::span<const RelationId> path) {
    if (path.size() > kMaxPathHops) throw std::invalid_argument("path longer than supported");
    if (path.empty()) return sources;
    if (sources.empty()) return {};
    auto terminals = raw_terminals(sources, path);
    detail::truncate_sorted(
        terminals, [&](const EntityId& e) { return profile().entity_iri(e); },
        profile().result_cap, "terminal entities");
    return {terminals.begin(), terminals.end()};
}

std::vector<RelationPath> InMemorySource::shortest_paths(const EntityId& source,
                                                         const EntitySet& answers, int max_hop) {
    if (max_hop < 1 || max_hop > 2) throw std::invalid_argument("max_hop must be 1 or 2");
    if (answers.empty()) throw std::invalid_argument("answers must be non-empty");
    auto iri_key = [&](const RelationPath& p) {
        std::vector<std::string> key;
        for (const auto& r : p) key.push_back(profile().relation_iri(r));
        return key;
    };
    for (int hops = 1; hops <= max_hop; ++hops) {
        auto paths = raw_paths(source, answers, hops);
        detail::truncate_sorted(paths, iri_key, profile().result_cap, "path search");
        std::erase_if(paths, [&](const RelationPath& p) {
            return std::any_of(p.begin(), p.end(), [&](const auto& r) { return is_blocked(r); });
        });
        if (!paths.empty()) {
            std::sort(paths.begin(), paths.end());
            return paths;
        }
    }
    return {};
}

std::vector<std::pair<EntityId, EntityId>> InMemorySource::edges(const EntitySet& subjects,
                                                                 const RelationId& relation) {
    if (subjects.empty()) return {};
    auto pairs = raw_edges(subjects, relation);
    detail::truncate_sorted(
        pairs,
        [&](const std::pair<EntityId, EntityId>& p) {
            return std::make_pair(profile().entity_iri(p.first), profile().entity_iri(p.second));
        },
        profile().result_cap, "edges");
    return pairs;
}

std::map<std::string, std::string> InMemorySource::fetch_labels(const std::set<std::string>& ids) {
    std::map<std::string, std::string> out;
    for (const auto& id : ids) {
        const auto it = fixture_.labels.find(id);
        out[id] = it != fixture_.labels.end() ? it->second : profile().shorten(id);
    }
    return out;
}

}  // namespace srtk
