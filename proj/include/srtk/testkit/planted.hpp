#pragma once

#include <cstdint>
#include <vector>

#include "srtk/kgdata.hpp"
#include "srtk/memory_source.hpp"

namespace srtk::testkit {

struct PlantedInstance {
    TripleStoreFixture graph;
    std::vector<QuestionRecord> records;  // question, question_entities, answer_entities, paths
    std::vector<RelationPath> gold_paths;  // aligned with records
};

/// Synthetic graph with one planted answer path per record. Every hop offers
/// `branching - 1` distractor relations next to the gold one, and the answer node
/// has distractors of its own. Node ids are private to their record, so the gold
/// path reaches exactly the answer. Requires max_hop in [1, 3] and branching >= 2.
PlantedInstance generate_planted(std::uint64_t seed, std::size_t n_records, int max_hop,
                                 std::size_t branching);

/// Same instance with Wikidata-shaped ids (Q.../P...), for pipelines that check id syntax.
PlantedInstance with_wikidata_ids(const PlantedInstance& instance);

}  // namespace srtk::testkit
