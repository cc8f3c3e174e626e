#include "srtk/testkit/planted.hpp"

#include <map>
#include <stdexcept>

#include "srtk/testkit/fixtures.hpp"

namespace srtk::testkit {

namespace {

// Distinct relations drawn from the shared pool, gold first.
std::vector<std::size_t> pick_relations(Rng& rng, std::size_t pool, std::size_t count) {
    std::vector<std::size_t> all(pool);
    for (std::size_t i = 0; i < pool; ++i) all[i] = i;
    for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + rng.below(pool - i)]);
    all.resize(count);
    return all;
}

std::string relation_id(std::size_t index) { return "rel" + std::to_string(index); }

}  // namespace

PlantedInstance generate_planted(std::uint64_t seed, std::size_t n_records, int max_hop,
                                 std::size_t branching) {
    if (max_hop < 1 || max_hop > 3) throw std::invalid_argument("max_hop must be in [1, 3]");
    if (branching < 2) throw std::invalid_argument("branching must be >= 2");
    const std::size_t pool = 4 * branching;

    Rng rng(seed);
    PlantedInstance instance;
    for (std::size_t i = 0; i < n_records; ++i) {
        const std::string prefix = "p" + std::to_string(i) + "_";
        const auto hops = static_cast<std::size_t>(rng.between(1, static_cast<std::uint64_t>(max_hop)));
        RelationPath gold;
        std::string node = prefix + "n0";
        instance.graph.labels[node] = "start " + std::to_string(i);
        for (std::size_t h = 0; h <= hops; ++h) {
            // picked[0] is the gold relation; the answer node (h == hops) gets distractors only.
            const auto picked = pick_relations(rng, pool, branching);
            const bool at_answer = h == hops;
            for (std::size_t k = 1; k < picked.size(); ++k) {
                const auto rel = relation_id(picked[k]);
                const auto target = prefix + "d" + std::to_string(h) + "_" + std::to_string(k);
                instance.graph.triples.insert({node, rel, target});
            }
            if (at_answer) break;
            const auto rel = relation_id(picked[0]);
            const auto next = prefix + "n" + std::to_string(h + 1);
            instance.graph.triples.insert({node, rel, next});
            gold.push_back(rel);
            node = next;
        }
        QuestionRecord record;
        record.id = "planted-" + std::to_string(i);
        record.question = "question " + std::to_string(i);
        record.question_entities = std::vector<EntityId>{prefix + "n0"};
        record.answer_entities = std::vector<EntityId>{node};
        Json paths = Json::array();
        paths.push_back(gold);
        record.extra["paths"] = paths;
        instance.records.push_back(std::move(record));
        instance.gold_paths.push_back(std::move(gold));
    }
    std::set<std::string> used;
    for (const auto& t : instance.graph.triples) used.insert(t.predicate);
    for (const auto& rel : used) {
        instance.graph.labels[rel] = "relation " + rel.substr(3);
    }
    return instance;
}

PlantedInstance with_wikidata_ids(const PlantedInstance& instance) {
    std::map<std::string, std::string> entity_ids, relation_ids;
    auto entity = [&](const std::string& id) {
        auto [it, inserted] = entity_ids.emplace(id, "");
        if (inserted) it->second = "Q" + std::to_string(1000 + entity_ids.size());
        return it->second;
    };
    auto relation = [&](const std::string& id) {
        auto [it, inserted] = relation_ids.emplace(id, "");
        if (inserted) it->second = "P" + std::to_string(100 + relation_ids.size());
        return it->second;
    };

    PlantedInstance out;
    for (const auto& t : instance.graph.triples) {
        out.graph.triples.insert({entity(t.subject), relation(t.predicate), entity(t.object)});
    }
    for (const auto& [id, label] : instance.graph.labels) {
        const auto renamed = id.starts_with("rel") ? relation(id) : entity(id);
        out.graph.labels[renamed] = label;
    }
    for (std::size_t i = 0; i < instance.records.size(); ++i) {
        auto record = instance.records[i];
        for (auto* list : {&record.question_entities, &record.answer_entities}) {
            if (*list) {
                for (auto& id : **list) id = entity(id);
            }
        }
        RelationPath gold;
        for (const auto& r : instance.gold_paths[i]) gold.push_back(relation(r));
        Json paths = Json::array();
        paths.push_back(gold);
        record.extra["paths"] = paths;
        out.records.push_back(std::move(record));
        out.gold_paths.push_back(std::move(gold));
    }
    return out;
}

}  // namespace srtk::testkit
