#include "srtk/preprocess.hpp"

#include <map>
#include <stdexcept>

#include "srtk/errors.hpp"

namespace srtk {

PathMetric metric_by_name(std::string_view name) {
    if (name == "jaccard") {
        return [](const EntitySet& retrieved, const EntitySet& answers) {
            return jaccard(retrieved, answers);
        };
    }
    throw ConfigError("unknown path metric '" + std::string(name) + "'");
}

std::vector<ScoredPath> find_scored_paths(const QuestionRecord& record, KnowledgeSource& source,
                                          double threshold, const PathMetric& metric) {
    if (!record.question_entities || !record.answer_entities) {
        throw FormatError("path search needs question_entities and answer_entities");
    }
    const PathMetric& score = metric ? metric : metric_by_name("jaccard");
    const EntitySet sources(record.question_entities->begin(), record.question_entities->end());
    const EntitySet answers(record.answer_entities->begin(), record.answer_entities->end());
    if (sources.empty() || answers.empty()) return {};

    std::map<RelationPath, double> best;
    for (const auto& entity : sources) {
        for (auto& path : source.shortest_paths(entity, answers, 2)) {
            const double agreement = score(source.terminal_entities({entity}, path), answers);
            if (agreement < threshold) continue;
            auto [it, inserted] = best.emplace(std::move(path), agreement);
            if (!inserted) it->second = std::max(it->second, agreement);
        }
    }
    std::vector<ScoredPath> out;
    out.reserve(best.size());
    for (auto& [relations, agreement] : best) out.push_back({relations, agreement});
    std::stable_sort(out.begin(), out.end(), [](const ScoredPath& a, const ScoredPath& b) {
        return a.agreement > b.agreement;
    });
    return out;
}

std::vector<std::pair<std::string, std::string>> decompose_path(
    std::string_view question, std::span<const std::string> path_labels) {
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(path_labels.size() + 1);
    for (std::size_t k = 0; k <= path_labels.size(); ++k) {
        const bool last = k == path_labels.size();
        pairs.emplace_back(compose_query(question, path_labels.first(k)),
                           last ? std::string(kEndLabel) : path_labels[k]);
    }
    return pairs;
}

std::vector<RelationPath> gold_paths(const QuestionRecord& record) {
    if (!record.extra.contains("paths")) return {};
    const auto& value = record.extra.at("paths");
    if (!value.is_array()) throw FormatError("field 'paths': expected a list of relation lists");
    std::vector<RelationPath> paths;
    for (const auto& path : value) {
        if (!path.is_array()) throw FormatError("field 'paths': expected a list of relation lists");
        RelationPath relations;
        for (const auto& relation : path) {
            if (!relation.is_string() || !is_valid_id(relation.get<std::string>())) {
                throw FormatError("field 'paths': relation ids must be non-empty strings");
            }
            relations.push_back(relation.get<std::string>());
        }
        paths.push_back(std::move(relations));
    }
    return paths;
}

std::vector<TrainSample> generate_samples(const QuestionRecord& record, std::size_t record_index,
                                          KnowledgeSource& source, LabelCache& labels,
                                          const SampleOptions& options) {
    const auto& question = record.question_text();
    std::vector<RelationPath> paths;
    if (options.search_path) {
        for (auto& scored : find_scored_paths(record, source, options.threshold, options.metric)) {
            paths.push_back(std::move(scored.relations));
        }
    } else {
        paths = gold_paths(record);
    }

    const EntitySet start = record.question_entities
                                ? EntitySet(record.question_entities->begin(),
                                            record.question_entities->end())
                                : EntitySet{};
    std::vector<TrainSample> samples;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& path = paths[p];
        std::vector<std::string> path_labels;
        for (const auto& relation : path) path_labels.push_back(labels.label(relation));
        const auto pairs = decompose_path(question, path_labels);

        EntitySet frontier = start;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            TrainSample sample{pairs[k].first, pairs[k].second, {}};
            if (options.num_negative > 0 && !frontier.empty()) {
                const std::optional<RelationId> exclude =
                    k < path.size() ? std::optional<RelationId>(path[k]) : std::nullopt;
                // Draw a full seeded order, then keep the first distinct labels that
                // differ from the positive; relations can share labels.
                const auto ordered = source.sample_negative_relations(
                    frontier, exclude, SIZE_MAX, mix_seed({options.seed, record_index, p, k}));
                const auto negative_labels = labels.labels({ordered.begin(), ordered.end()});
                std::set<std::string> taken;
                for (const auto& relation : ordered) {
                    if (sample.negatives.size() == options.num_negative) break;
                    const auto& label = negative_labels.at(relation);
                    if (label == sample.positive || !taken.insert(label).second) continue;
                    sample.negatives.push_back(label);
                }
            }
            samples.push_back(std::move(sample));
            if (k < path.size()) {
                const RelationPath step{path[k]};
                frontier = frontier.empty() ? frontier : source.terminal_entities(frontier, step);
            }
        }
    }
    return samples;
}

}  // namespace srtk
