#include <gtest/gtest.h>

#include <algorithm>

#include "srtk/errors.hpp"
#include "srtk/memory_source.hpp"
#include "srtk/preprocess.hpp"
#include "srtk/testkit/fixtures.hpp"

using namespace srtk;
using testkit::custom_profile;

namespace {

QuestionRecord weak_record(std::string question, std::vector<std::string> entities,
                           std::vector<std::string> answers) {
    QuestionRecord record;
    record.question = std::move(question);
    record.question_entities = std::move(entities);
    record.answer_entities = std::move(answers);
    return record;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

std::set<int> random_set(testkit::Rng& rng) {
    std::set<int> out;
    for (auto n = rng.below(8); n > 0; --n) out.insert(static_cast<int>(rng.below(12)));
    return out;
}

}  // namespace

TEST(Jaccard, Examples) {
    EXPECT_EQ(jaccard<std::string>({"E2"}, {"E2"}), 1.0);
    EXPECT_EQ(jaccard<std::string>({"E2", "E3"}, {"E2"}), 0.5);
    EXPECT_EQ(jaccard<std::string>({}, {}), 0.0);
    EXPECT_EQ(jaccard<std::string>({"E2"}, {}), 0.0);
    EXPECT_EQ(jaccard<int>({1, 2, 3}, {3, 4}), 0.25);
}

TEST(Jaccard, PropertySymmetricAndBounded) {
    testkit::Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = random_set(rng);
        const auto b = random_set(rng);
        const double j = jaccard(a, b);
        EXPECT_EQ(j, jaccard(b, a));
        EXPECT_GE(j, 0.0);
        EXPECT_LE(j, 1.0);
        if (!a.empty()) EXPECT_EQ(jaccard(a, a), 1.0);
    }
}

TEST(Metric, ByName) {
    const auto metric = metric_by_name("jaccard");
    EXPECT_EQ(metric({"a", "b"}, {"b"}), 0.5);
    EXPECT_THROW(metric_by_name("cosine"), ConfigError);
}

TEST(FindScoredPaths, G0SingleHop) {
    InMemorySource source(testkit::g0_fixture(), custom_profile());
    const auto paths = find_scored_paths(weak_record("q", {"E1"}, {"E2"}), source, 0.5, {});
    EXPECT_EQ(paths, (std::vector<ScoredPath>{{{"Rloc"}, 1.0}}));
}

TEST(FindScoredPaths, G0TwoHopAndUnreachable) {
    InMemorySource source(testkit::g0_fixture(), custom_profile());
    EXPECT_EQ(find_scored_paths(weak_record("q", {"E1"}, {"E4"}), source, 0.5, {}),
              (std::vector<ScoredPath>{{{"Rloc", "Rloc"}, 1.0}}));
    EXPECT_TRUE(find_scored_paths(weak_record("q", {"E4"}, {"E1"}), source, 0.0, {}).empty());
    EXPECT_TRUE(find_scored_paths(weak_record("q", {"E1"}, {"missing"}), source, 0.0, {}).empty());
    EXPECT_TRUE(find_scored_paths(weak_record("q", {}, {"E2"}), source, 0.0, {}).empty());
}

TEST(FindScoredPaths, ThresholdFilter) {
    TripleStoreFixture f;
    f.triples = {{"A", "r1", "X"}, {"A", "r2", "X"}, {"A", "r2", "Y"}};
    InMemorySource source(f, custom_profile());
    const auto record = weak_record("q", {"A"}, {"X"});
    EXPECT_EQ(find_scored_paths(record, source, 0.6, {}), (std::vector<ScoredPath>{{{"r1"}, 1.0}}));
    EXPECT_EQ(find_scored_paths(record, source, 0.5, {}),
              (std::vector<ScoredPath>{{{"r1"}, 1.0}, {{"r2"}, 0.5}}));
}

TEST(FindScoredPaths, MissingFieldsRejected) {
    InMemorySource source(testkit::g0_fixture(), custom_profile());
    QuestionRecord record;
    record.question = "q";
    record.question_entities = std::vector<std::string>{"E1"};
    EXPECT_THROW(find_scored_paths(record, source, 0.5, {}), FormatError);
}

TEST(FindScoredPaths, PropertyOrderInvariant) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto fixture = testkit::random_fixture(seed);
        InMemorySource source(fixture, custom_profile());
        testkit::Rng rng(seed);
        const auto subjects = testkit::subjects_of(fixture);
        std::vector<std::string> entities, answers;
        for (int i = 0; i < 3; ++i) entities.push_back(subjects[rng.below(subjects.size())]);
        for (int i = 0; i < 4; ++i) answers.push_back("N" + std::to_string(rng.below(20)));
        const auto forward = find_scored_paths(weak_record("q", entities, answers), source, 0.2, {});
        std::reverse(entities.begin(), entities.end());
        std::rotate(answers.begin(), answers.begin() + 1, answers.end());
        EXPECT_EQ(forward, find_scored_paths(weak_record("q", entities, answers), source, 0.2, {}));
        for (std::size_t i = 1; i < forward.size(); ++i) {
            EXPECT_GE(forward[i - 1].agreement, forward[i].agreement);
        }
    }
}

TEST(DecomposePath, HakataSamples) {
    const std::vector<std::string> labels{"located in the administrative entity"};
    const auto pairs = decompose_path("Where is Hakata Ward?", labels);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].first, "Where is Hakata Ward? [SEP]");
    EXPECT_EQ(pairs[0].second, "located in the administrative entity");
    EXPECT_EQ(pairs[1].first, "Where is Hakata Ward? [SEP] located in the administrative entity");
    EXPECT_EQ(pairs[1].second, "END");
}

TEST(DecomposePath, EmptyAndTwoHop) {
    const auto empty = decompose_path("q", {});
    ASSERT_EQ(empty.size(), 1u);
    EXPECT_EQ(empty[0], (std::pair<std::string, std::string>{"q [SEP]", "END"}));
    const std::vector<std::string> labels{"a b", "c"};
    const auto pairs = decompose_path("q", labels);
    ASSERT_EQ(pairs.size(), 3u);
    EXPECT_EQ(pairs[0].first, "q [SEP]");
    EXPECT_EQ(pairs[1].first, "q [SEP] a b");
    EXPECT_EQ(pairs[2].first, "q [SEP] a b c");
    EXPECT_EQ(pairs[1].second, "c");
}

TEST(GenerateSamples, HakataReferenceSample) {
    InMemorySource source(testkit::hakata_fixture(false), custom_profile());
    LabelCache labels(source);
    const auto record = weak_record("Where is Hakata Ward?", {testkit::kHakata}, {testkit::kFukuoka});
    SampleOptions options;
    options.num_negative = 2;
    const auto samples = generate_samples(record, 0, source, labels, options);
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_EQ(samples[0].query, "Where is Hakata Ward? [SEP]");
    EXPECT_EQ(samples[0].positive, "located in the administrative entity");
    EXPECT_EQ(as_set(samples[0].negatives),
              (std::set<std::string>{"located in time zone", "different from"}));
    EXPECT_EQ(samples[1].positive, "END");
    // Fukuoka has no outgoing edges, so the END step has nothing to contrast with.
    EXPECT_TRUE(samples[1].negatives.empty());
}

TEST(GenerateSamples, DeterministicUnderSeed) {
    InMemorySource source(testkit::hakata_fixture(), custom_profile());
    LabelCache labels(source);
    const auto record = weak_record("Where is Hakata Ward?", {testkit::kHakata}, {testkit::kFukuoka});
    SampleOptions options;
    options.seed = 9;
    const auto a = generate_samples(record, 3, source, labels, options);
    const auto b = generate_samples(record, 3, source, labels, options);
    EXPECT_EQ(a, b);
    std::set<std::vector<std::string>> seen;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        options.seed = seed;
        seen.insert(generate_samples(record, 3, source, labels, options)[0].negatives);
    }
    EXPECT_GT(seen.size(), 1u);
}

TEST(GenerateSamples, ZeroNegatives) {
    InMemorySource source(testkit::hakata_fixture(), custom_profile());
    LabelCache labels(source);
    SampleOptions options;
    options.num_negative = 0;
    const auto samples = generate_samples(
        weak_record("Where is Hakata Ward?", {testkit::kHakata}, {testkit::kFukuoka}), 0, source, labels, options);
    ASSERT_EQ(samples.size(), 2u);
    for (const auto& s : samples) EXPECT_TRUE(s.negatives.empty());
}

TEST(GenerateSamples, G0NegativesComeFromFrontier) {
    InMemorySource source(testkit::g0_fixture(), custom_profile());
    LabelCache labels(source);
    SampleOptions options;
    options.num_negative = 5;
    const auto samples = generate_samples(weak_record("q", {"E1"}, {"E4"}), 0, source, labels, options);
    ASSERT_EQ(samples.size(), 3u);
    EXPECT_EQ(as_set(samples[0].negatives), (std::set<std::string>{"country", "time zone"}));
    // Step two starts at E2, whose only relation is the positive itself.
    EXPECT_TRUE(samples[1].negatives.empty());
    // END at E4: a dead end, so no negatives.
    EXPECT_TRUE(samples[2].negatives.empty());
}

TEST(GenerateSamples, EndSampleNegativesAtFrontier) {
    InMemorySource source(testkit::g0_fixture(), custom_profile());
    LabelCache labels(source);
    SampleOptions options;
    options.num_negative = 5;
    const auto samples = generate_samples(weak_record("q", {"E1"}, {"E2"}), 0, source, labels, options);
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_EQ(samples[1].positive, "END");
    EXPECT_EQ(as_set(samples[1].negatives), (std::set<std::string>{"located in"}));
}

TEST(GenerateSamples, SupervisedModeSkipsSearch) {
    InMemorySource inner(testkit::g0_fixture(), custom_profile());
    testkit::CountingSource source(inner);
    LabelCache labels(source);
    QuestionRecord record;
    record.question = "q";
    record.question_entities = std::vector<std::string>{"E1"};
    record.extra["paths"] = Json::parse(R"([["Rloc", "Rloc"]])");
    SampleOptions options;
    options.search_path = false;
    const auto samples = generate_samples(record, 0, source, labels, options);
    EXPECT_EQ(samples.size(), 3u);
    EXPECT_EQ(source.path_calls(), 0u);
    EXPECT_EQ(samples[1].query, "q [SEP] located in");
}

TEST(GenerateSamples, PropertyCountsAndDisjointness) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto fixture = testkit::random_fixture(seed);
        InMemorySource source(fixture, custom_profile());
        LabelCache labels(source);
        testkit::Rng rng(seed);
        const auto subjects = testkit::subjects_of(fixture);
        const auto record = weak_record(testkit::random_question(rng), {subjects[rng.below(subjects.size())]},
                                        {"N" + std::to_string(rng.below(20))});
        SampleOptions options;
        options.threshold = 0.0;
        options.num_negative = 3;
        options.seed = seed;
        std::size_t expected = 0;
        for (const auto& p : find_scored_paths(record, source, 0.0, {})) expected += p.relations.size() + 1;
        const auto samples = generate_samples(record, 0, source, labels, options);
        EXPECT_EQ(samples.size(), expected);
        for (const auto& s : samples) {
            EXPECT_EQ(std::count(s.negatives.begin(), s.negatives.end(), s.positive), 0);
            EXPECT_LE(s.negatives.size(), 3u);
            EXPECT_EQ(as_set(s.negatives).size(), s.negatives.size());
        }
    }
}

TEST(GoldPaths, Parsing) {
    QuestionRecord record;
    EXPECT_TRUE(gold_paths(record).empty());
    record.extra["paths"] = Json::parse(R"([["P31"], [], ["P1", "P2"]])");
    EXPECT_EQ(gold_paths(record), (std::vector<RelationPath>{{"P31"}, {}, {"P1", "P2"}}));
    record.extra["paths"] = Json::parse(R"(["P31"])");
    EXPECT_THROW(gold_paths(record), FormatError);
    record.extra["paths"] = Json::parse(R"([[1]])");
    EXPECT_THROW(gold_paths(record), FormatError);
}
