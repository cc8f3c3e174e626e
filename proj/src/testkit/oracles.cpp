#include "srtk/testkit/oracles.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <unordered_map>

namespace srtk::testkit {

namespace {

class OracleScorer final : public Scorer {
public:
    explicit OracleScorer(std::unordered_map<std::string, std::string> next)
        : next_(std::move(next)) {}

    ScoredCandidates score(const ScoreRequest& request) override {
        ScoredCandidates out;
        out.provenance = ScoreProvenance::oracle;
        const auto it = next_.find(request.query);
        for (const auto& candidate : request.candidates) {
            out.scores.push_back(it != next_.end() && it->second == candidate ? 1.0 : 0.0);
        }
        return out;
    }

private:
    std::unordered_map<std::string, std::string> next_;  // gold prefix query -> next label
};

struct Walk {
    const std::map<std::string, std::multimap<std::string, std::string>>& adjacency;
    const std::map<std::string, std::string>& labels;
    const std::string& question;
    Scorer& scorer;
    std::size_t max_depth;
    double temperature;
    std::vector<ExpansionPath> out;

    std::string label(const std::string& id) const {
        const auto it = labels.find(id);
        return it == labels.end() ? id : it->second;
    }

    void visit(const RelationPath& prefix, const EntitySet& frontier, double log_score) {
        if (prefix.size() == max_depth) {
            out.push_back({prefix, false, log_score});
            return;
        }
        std::set<std::string> relations;
        for (const auto& entity : frontier) {
            const auto it = adjacency.find(entity);
            if (it == adjacency.end()) continue;
            for (const auto& [relation, object] : it->second) relations.insert(relation);
        }
        if (relations.empty()) {
            out.push_back({prefix, true, log_score});
            return;
        }

        std::vector<std::string> prefix_labels;
        for (const auto& r : prefix) prefix_labels.push_back(label(r));
        ScoreRequest request{compose_query(question, prefix_labels), {}};
        std::vector<std::string> moves;
        for (const auto& r : relations) moves.push_back(label(r));
        moves.emplace_back(kEndLabel);
        for (const auto& text : moves) {
            if (std::find(request.candidates.begin(), request.candidates.end(), text) ==
                request.candidates.end()) {
                request.candidates.push_back(text);
            }
        }
        const auto scored = scorer.score(request);
        std::vector<double> per_move;
        for (const auto& text : moves) {
            const auto pos = std::find(request.candidates.begin(), request.candidates.end(), text);
            per_move.push_back(scored.scores[static_cast<std::size_t>(pos - request.candidates.begin())]);
        }
        const auto log_probs = softmax_log_probs(per_move, temperature);

        std::size_t move = 0;
        for (const auto& r : relations) {
            EntitySet next;
            for (const auto& entity : frontier) {
                const auto it = adjacency.find(entity);
                if (it == adjacency.end()) continue;
                auto [first, last] = it->second.equal_range(r);
                for (; first != last; ++first) next.insert(first->second);
            }
            RelationPath child = prefix;
            child.push_back(r);
            visit(child, next, log_score + log_probs[move++]);
        }
        out.push_back({prefix, true, log_score + log_probs[move]});
    }
};

}  // namespace

std::unique_ptr<Scorer> oracle_scorer(const PlantedInstance& instance) {
    std::unordered_map<std::string, std::string> next;
    for (std::size_t i = 0; i < instance.records.size(); ++i) {
        const auto& question = *instance.records[i].question;
        std::vector<std::string> labels;
        for (const auto& r : instance.gold_paths[i]) {
            const auto it = instance.graph.labels.find(r);
            labels.push_back(it == instance.graph.labels.end() ? r : it->second);
        }
        for (std::size_t k = 0; k <= labels.size(); ++k) {
            const std::span<const std::string> prefix(labels.data(), k);
            next[compose_query(question, prefix)] =
                k < labels.size() ? labels[k] : std::string(kEndLabel);
        }
    }
    return std::make_unique<OracleScorer>(std::move(next));
}

std::vector<ExpansionPath> brute_force_paths(const TripleStoreFixture& graph,
                                             const EntitySet& entities,
                                             const std::string& question, Scorer& scorer,
                                             std::size_t max_depth, double temperature) {
    if (entities.empty()) return {};
    std::map<std::string, std::multimap<std::string, std::string>> adjacency;
    for (const auto& t : graph.triples) adjacency[t.subject].emplace(t.predicate, t.object);

    Walk walk{adjacency, graph.labels, question, scorer, max_depth, temperature, {}};
    walk.visit({}, entities, 0.0);
    auto ranked = std::move(walk.out);
    std::sort(ranked.begin(), ranked.end(), [](const ExpansionPath& a, const ExpansionPath& b) {
        if (a.log_score > b.log_score) return true;
        if (a.log_score < b.log_score) return false;
        if (a.relations < b.relations) return true;
        if (b.relations < a.relations) return false;
        return a.terminated > b.terminated;
    });
    return ranked;
}

std::vector<std::string> external_references(const std::string& html) {
    static const std::regex pattern(
        R"((\b(src|href|srcset|action|poster)\s*=)|url\s*\(|@import|<\s*(link|iframe|object|embed|base)\b|\bfetch\s*\(|XMLHttpRequest|WebSocket|EventSource|sendBeacon|\bimport\s*\(|importScripts)",
        std::regex::icase);
    std::vector<std::string> found;
    for (auto it = std::sregex_iterator(html.begin(), html.end(), pattern); it != std::sregex_iterator(); ++it) {
        found.push_back(it->str());
    }
    return found;
}

}  // namespace srtk::testkit
