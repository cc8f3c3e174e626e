#include "srtk/expander.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "srtk/errors.hpp"

namespace srtk {

namespace {

std::string describe(const RelationPath& path) {
    std::string out = "[";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += ", ";
        out += path[i];
    }
    return out + "]";
}

// Re-raises a knowledge-source failure with the path being expanded in the message.
template <typename Fn>
auto with_path_context(const RelationPath& path, Fn&& fn) {
    try {
        return fn();
    } catch (const AuthError& e) {
        throw AuthError("expanding path " + describe(path) + ": " + e.what());
    } catch (const TransportError& e) {
        throw TransportError("expanding path " + describe(path) + ": " + e.what());
    } catch (const ProtocolError& e) {
        throw ProtocolError("expanding path " + describe(path) + ": " + e.what());
    }
}

void cap_frontier(EntitySet& frontier, std::size_t cap) {
    if (frontier.size() <= cap) return;
    spdlog::warn("frontier of {} entities truncated to {}", frontier.size(), cap);
    frontier.erase(std::next(frontier.begin(), static_cast<std::ptrdiff_t>(cap)), frontier.end());
}

// Child produced during one step; the frontier is resolved only for survivors.
struct Candidate {
    ExpansionPath path;
    const BeamEntry* parent = nullptr;
    bool needs_frontier = false;
};

}  // namespace

bool path_precedes(const ExpansionPath& a, const ExpansionPath& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    if (a.relations != b.relations) return a.relations < b.relations;
    return a.terminated && !b.terminated;
}

Beam expand_step(const Beam& beam, const std::string& question, Scorer& scorer,
                 KnowledgeSource& source, LabelCache& labels, const ExpansionOptions& options) {
    if (beam.empty()) throw std::invalid_argument("expand_step needs a non-empty beam");
    if (options.beam_width == 0) throw std::invalid_argument("beam width must be >= 1");

    std::vector<Candidate> pool;
    for (const auto& entry : beam) {
        if (entry.path.terminated) {
            pool.push_back({entry.path, &entry, false});
            continue;
        }
        const auto relations = with_path_context(entry.path.relations, [&] {
            return source.connected_relations(entry.frontier);
        });
        if (relations.empty()) {
            // Dead end: END is the only move and costs nothing.
            ExpansionPath ended = entry.path;
            ended.terminated = true;
            pool.push_back({std::move(ended), &entry, false});
            continue;
        }

        std::vector<std::string> prefix_labels;
        for (const auto& r : entry.path.relations) prefix_labels.push_back(labels.label(r));
        const auto relation_labels = labels.labels({relations.begin(), relations.end()});

        // Relations sharing a label are scored once; END is scored by its literal label.
        ScoreRequest request;
        request.query = compose_query(question, prefix_labels);
        std::map<std::string, std::size_t> text_index;
        std::vector<std::size_t> slot;  // per relation (sorted), then END
        auto index_of = [&](const std::string& text) {
            auto [it, inserted] = text_index.emplace(text, request.candidates.size());
            if (inserted) request.candidates.push_back(text);
            return it->second;
        };
        for (const auto& r : relations) slot.push_back(index_of(relation_labels.at(r)));
        slot.push_back(index_of(std::string(kEndLabel)));

        const auto scored = scorer.score(request);
        if (scored.scores.size() != request.candidates.size()) {
            throw ProtocolError("scorer returned the wrong number of scores");
        }
        std::vector<double> per_move;
        per_move.reserve(slot.size());
        for (const auto index : slot) {
            if (!std::isfinite(scored.scores[index])) throw ProtocolError("scorer returned a non-finite score");
            per_move.push_back(scored.scores[index]);
        }
        const auto log_probs = softmax_log_probs(per_move, options.temperature);

        std::size_t move = 0;
        for (const auto& r : relations) {
            ExpansionPath child = entry.path;
            child.relations.push_back(r);
            child.log_score += log_probs[move++];
            pool.push_back({std::move(child), &entry, true});
        }
        ExpansionPath ended = entry.path;
        ended.terminated = true;
        ended.log_score += log_probs[move];
        pool.push_back({std::move(ended), &entry, false});
    }

    const auto keep = std::min(options.beam_width, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                      [](const Candidate& a, const Candidate& b) {
                          return path_precedes(a.path, b.path);
                      });
    pool.resize(keep);

    Beam next;
    next.reserve(pool.size());
    for (auto& candidate : pool) {
        BeamEntry entry{std::move(candidate.path), candidate.parent->frontier};
        if (candidate.needs_frontier) {
            const RelationPath step{entry.path.relations.back()};
            entry.frontier = with_path_context(entry.path.relations, [&] {
                return source.terminal_entities(candidate.parent->frontier, step);
            });
            cap_frontier(entry.frontier, options.frontier_cap);
        }
        next.push_back(std::move(entry));
    }
    return next;
}

std::vector<ExpansionPath> retrieve_paths(const std::string& question, const EntitySet& entities,
                                          Scorer& scorer, KnowledgeSource& source,
                                          LabelCache& labels, const ExpansionOptions& options) {
    if (options.beam_width == 0) throw std::invalid_argument("beam width must be >= 1");
    if (entities.empty()) return {};
    EntitySet start = entities;
    cap_frontier(start, options.frontier_cap);
    Beam beam{BeamEntry{ExpansionPath{}, std::move(start)}};
    for (std::size_t depth = 0; depth < options.max_depth; ++depth) {
        if (std::all_of(beam.begin(), beam.end(),
                        [](const BeamEntry& e) { return e.path.terminated; })) {
            break;
        }
        beam = expand_step(beam, question, scorer, source, labels, options);
    }
    std::vector<ExpansionPath> paths;
    paths.reserve(beam.size());
    for (auto& entry : beam) paths.push_back(std::move(entry.path));
    std::sort(paths.begin(), paths.end(), path_precedes);
    return paths;
}

Subgraph materialize_subgraph(const EntitySet& entities, const std::vector<ExpansionPath>& paths,
                              KnowledgeSource& source) {
    Subgraph subgraph;
    for (const auto& path : paths) {
        EntitySet frontier = entities;
        for (const auto& relation : path.relations) {
            if (frontier.empty()) break;
            const auto pairs = with_path_context(path.relations, [&] {
                return source.edges(frontier, relation);
            });
            EntitySet next;
            for (const auto& [subject, object] : pairs) {
                subgraph.add({subject, relation, object});
                next.insert(object);
            }
            frontier = std::move(next);
        }
    }
    return subgraph;
}

Retriever::Retriever(KnowledgeSource& source, Scorer& scorer, ExpansionOptions options)
    : source_(&source), scorer_(&scorer), labels_(source), options_(options) {
    if (options_.beam_width == 0) throw ConfigError("beam width must be >= 1");
    if (!(options_.temperature > 0.0)) throw ConfigError("temperature must be positive");
}

RetrievalResult Retriever::retrieve(const QuestionRecord& record) {
    const auto& question = record.question_text();
    EntitySet entities;
    if (record.question_entities) {
        entities.insert(record.question_entities->begin(), record.question_entities->end());
    }
    RetrievalResult result;
    result.record = record;
    result.paths = retrieve_paths(question, entities, *scorer_, *source_, labels_, options_);
    result.subgraph = materialize_subgraph(entities, *result.paths, *source_);
    return result;
}

}  // namespace srtk
