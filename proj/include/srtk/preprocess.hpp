#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srtk/kgdata.hpp"
#include "srtk/kgsource.hpp"

namespace srtk {

/// |a ∩ b| / |a ∪ b|; two empty sets give 0.
template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& item : a) common += b.count(item);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

/// Agreement between the entities a path retrieves and the answer set.
using PathMetric = std::function<double(const EntitySet& retrieved, const EntitySet& answers)>;

/// Looks up a metric by name ("jaccard" is the only built-in). Throws ConfigError.
PathMetric metric_by_name(std::string_view name);

struct ScoredPath {
    RelationPath relations;
    double agreement = 0.0;

    bool operator==(const ScoredPath&) const = default;
};

/// Shortest (≤ 2 hop) paths from each question entity to the answers, kept when their
/// terminal set agrees with the answers at least `threshold`. Sorted by agreement
/// (descending), then by relations.
std::vector<ScoredPath> find_scored_paths(const QuestionRecord& record, KnowledgeSource& source,
                                          double threshold, const PathMetric& metric);

/// K+1 (query, positive) pairs for a K-hop path given as relation labels; the last
/// positive is END.
std::vector<std::pair<std::string, std::string>> decompose_path(
    std::string_view question, std::span<const std::string> path_labels);

struct SampleOptions {
    double threshold = 0.5;
    std::size_t num_negative = 2;
    std::uint64_t seed = 0;
    /// Search answer paths (weak supervision) instead of reading gold `paths`.
    bool search_path = true;
    PathMetric metric;
};

/// Training samples for one record. `record_index` feeds the per-record seed so the
/// result does not depend on scheduling.
std::vector<TrainSample> generate_samples(const QuestionRecord& record, std::size_t record_index,
                                          KnowledgeSource& source, LabelCache& labels,
                                          const SampleOptions& options);

/// Gold relation paths stored in a record's `paths` field (list of relation-id lists).
std::vector<RelationPath> gold_paths(const QuestionRecord& record);

}  // namespace srtk
