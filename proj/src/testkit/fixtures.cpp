#include "srtk/testkit/fixtures.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <unistd.h>

namespace srtk::testkit {

namespace {

constexpr std::array<const char*, 14> kVocabulary = {
    "located", "in", "country", "time", "zone", "capital", "of", "river",
    "city",    "born", "where", "is",   "part", "member"};

std::string words(Rng& rng, std::size_t lo, std::size_t hi) {
    const auto count = rng.between(lo, hi);
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i) out.push_back(' ');
        out += kVocabulary[rng.below(kVocabulary.size())];
    }
    return out;
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw >= limit);
    return draw % bound;
}

KnowledgeGraphProfile custom_profile() {
    auto profile = KnowledgeGraphProfile::builtin(KnowledgeGraph::custom);
    profile.sparql_endpoint = "http://127.0.0.1:1/sparql";
    return profile;
}

TripleStoreFixture g0_fixture() {
    TripleStoreFixture f;
    f.triples = {{"E1", "Rloc", "E2"}, {"E1", "Rcountry", "E3"}, {"E1", "Rtz", "E5"},
                 {"E2", "Rloc", "E4"}};
    f.labels = {{"Rloc", "located in"}, {"Rcountry", "country"}, {"Rtz", "time zone"}};
    return f;
}

TripleStoreFixture hakata_fixture(bool with_country) {
    TripleStoreFixture f;
    f.triples = {{kHakata, kLocatedIn, kFukuoka},
                 {kHakata, kTimeZone, "Q6723"},
                 {kHakata, kDifferentFrom, "Q1330838"}};
    if (with_country) f.triples.insert({kHakata, kCountry, kJapan});
    f.labels = {{kHakata, "Hakata-ku"},
                {kFukuoka, "Fukuoka"},
                {"Q6723", "Japan Standard Time"},
                {"Q1330838", "Hakata"},
                {kLocatedIn, "located in the administrative entity"},
                {kTimeZone, "located in time zone"},
                {kDifferentFrom, "different from"}};
    if (with_country) {
        f.labels[kJapan] = "Japan";
        f.labels[kCountry] = "country";
    }
    return f;
}

TripleStoreFixture random_fixture(std::uint64_t seed, const RandomGraphOptions& options) {
    Rng rng(seed);
    TripleStoreFixture f;
    std::vector<std::string> relation_labels;
    for (std::size_t r = 0; r < options.relations; ++r) {
        std::string label;
        if (!relation_labels.empty() && rng.chance(options.shared_label_percent, 100)) {
            label = relation_labels[rng.below(relation_labels.size())];
        } else {
            label = words(rng, 1, 3);
        }
        relation_labels.push_back(label);
        f.labels["R" + std::to_string(r)] = label;
    }
    for (std::size_t e = 0; e < options.edges; ++e) {
        const auto s = rng.below(options.nodes);
        const auto o = rng.below(options.nodes);
        const auto r = rng.below(options.relations);
        f.triples.insert({"N" + std::to_string(s), "R" + std::to_string(r), "N" + std::to_string(o)});
    }
    // Drop labels of relations that never made it into a triple.
    std::set<std::string> used;
    for (const auto& t : f.triples) used.insert(t.predicate);
    std::erase_if(f.labels, [&](const auto& kv) { return !used.contains(kv.first); });
    return f;
}

std::string random_question(Rng& rng) { return words(rng, 2, 6); }

std::vector<std::string> subjects_of(const TripleStoreFixture& fixture) {
    std::set<std::string> subjects;
    for (const auto& t : fixture.triples) subjects.insert(t.subject);
    return {subjects.begin(), subjects.end()};
}

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("srtk-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::filesystem::path TempDir::write(const std::string& name, const std::string& content) const {
    const auto file = path_ / name;
    std::ofstream out(file, std::ios::binary);
    out << content;
    return file;
}

CountingSource::CountingSource(KnowledgeSource& inner)
    : KnowledgeSource(inner.profile()), inner_(&inner) {}

std::set<RelationId> CountingSource::connected_relations(const EntitySet& entities) {
    ++relation_calls_;
    return inner_->connected_relations(entities);
}

EntitySet CountingSource::terminal_entities(const EntitySet& sources,
                                            std::span<const RelationId> path) {
    ++terminal_calls_;
    return inner_->terminal_entities(sources, path);
}

std::vector<RelationPath> CountingSource::shortest_paths(const EntityId& source,
                                                         const EntitySet& answers, int max_hop) {
    ++path_calls_;
    return inner_->shortest_paths(source, answers, max_hop);
}

std::vector<std::pair<EntityId, EntityId>> CountingSource::edges(const EntitySet& subjects,
                                                                 const RelationId& relation) {
    ++edge_calls_;
    return inner_->edges(subjects, relation);
}

std::map<std::string, std::string> CountingSource::fetch_labels(const std::set<std::string>& ids) {
    ++label_calls_;
    return inner_->fetch_labels(ids);
}

}  // namespace srtk::testkit
