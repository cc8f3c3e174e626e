#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>

#include "srtk/errors.hpp"
#include "srtk/linker.hpp"
#include "srtk/testkit/fixtures.hpp"
#include "srtk/testkit/mock_endpoints.hpp"
#include "srtk/utf8.hpp"

using namespace srtk;
using namespace std::chrono_literals;

namespace {

HttpOptions fast() {
    HttpOptions options;
    options.timeout = 2000ms;
    options.retry_backoff = 5ms;
    return options;
}

Annotation make(std::size_t start, std::size_t end, double confidence, std::string target) {
    return {{start, end}, "m", target, target, confidence};
}

std::shared_ptr<const WikiMapping> hakata_mapping() {
    return std::make_shared<const WikiMapping>(std::vector<std::pair<std::string, std::string>>{
        {"Hakata-ku,_Fukuoka", "Q1330839"}, {"Fukuoka", "Q26600"}});
}

}  // namespace

TEST(RelAnnotate, HakataQuestion) {
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{{"Hakata Ward", "Hakata-ku, Fukuoka"}});
    HttpClient client(rel.url(), fast());
    const auto annotations = annotate_rel("Where is Hakata Ward?", client, std::nullopt);
    ASSERT_EQ(annotations.size(), 1u);
    EXPECT_EQ(annotations[0].span, (Span{9, 20}));
    EXPECT_EQ(annotations[0].mention, "Hakata Ward");
    EXPECT_EQ(annotations[0].target_name, "Hakata-ku,_Fukuoka");
}

TEST(RelAnnotate, EmptyQuestionRejected) {
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{});
    HttpClient client(rel.url(), fast());
    EXPECT_THROW(annotate_rel("", client, std::nullopt), std::invalid_argument);
    EXPECT_EQ(rel.calls(), 0u);
}

TEST(RelAnnotate, AuthorizationHeader) {
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{{"Hakata Ward", "Hakata-ku, Fukuoka"}}, "secret");
    HttpClient client(rel.url(), fast());
    EXPECT_THROW(annotate_rel("Where is Hakata Ward?", client, std::nullopt), AuthError);
    EXPECT_THROW(annotate_rel("Where is Hakata Ward?", client, std::string("wrong")), AuthError);
    EXPECT_EQ(annotate_rel("Where is Hakata Ward?", client, std::string("secret")).size(), 1u);
}

TEST(RelAnnotate, UnparseableBody) {
    EXPECT_THROW(parse_rel_response("q", "not json"), ProtocolError);
    EXPECT_THROW(parse_rel_response("q", R"({"a": 1})"), ProtocolError);
    EXPECT_THROW(parse_rel_response("q", R"([[0, 1, "q"]])"), ProtocolError);
}

TEST(RelAnnotate, OverlapKeepsHigherConfidence) {
    const std::string question = "the Hakata Ward office";
    const auto annotations = parse_rel_response(
        question, R"([[4, 11, "Hakata Ward", "Hakata-ku,_Fukuoka", 0.9], [4, 6, "Hakata", "Hakata", 0.4]])");
    ASSERT_EQ(annotations.size(), 1u);
    EXPECT_EQ(annotations[0].target_name, "Hakata-ku,_Fukuoka");
    EXPECT_DOUBLE_EQ(*annotations[0].confidence, 0.9);
}

TEST(ResolveOverlaps, TieBreaksAndOrder) {
    auto kept = resolve_overlaps({make(5, 8, 0.5, "c"), make(0, 3, 0.5, "a"), make(2, 6, 0.5, "b")});
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].target_id, "a");
    EXPECT_EQ(kept[1].target_id, "c");
    kept = resolve_overlaps({make(0, 2, 0.5, "short"), make(0, 5, 0.5, "long")});
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].target_id, "long");
    // Touching spans do not overlap.
    EXPECT_EQ(resolve_overlaps({make(0, 2, 0.1, "x"), make(2, 4, 0.9, "y")}).size(), 2u);
}

TEST(ResolveOverlaps, PropertyNoOverlapsRemain) {
    testkit::Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Annotation> input;
        for (auto n = rng.below(8); n > 0; --n) {
            const auto start = rng.below(30);
            input.push_back(make(start, start + rng.between(1, 6), static_cast<double>(rng.below(10)) / 10,
                                 std::to_string(trial)));
        }
        const auto out = resolve_overlaps(input);
        for (std::size_t i = 1; i < out.size(); ++i) {
            EXPECT_LE(out[i - 1].span.end, out[i].span.start);
        }
        // The single best-confidence annotation always survives.
        if (!input.empty()) {
            double best = 0;
            for (const auto& a : input) best = std::max(best, *a.confidence);
            double kept_best = 0;
            for (const auto& a : out) kept_best = std::max(kept_best, *a.confidence);
            EXPECT_EQ(best, kept_best);
        }
    }
}

TEST(MapToWikidata, RewritesAndCountsDrops) {
    const auto mapping = hakata_mapping();
    auto a = make(9, 20, 0.9, "Hakata-ku,_Fukuoka");
    auto mapped = map_to_wikidata({a}, *mapping);
    ASSERT_EQ(mapped.annotations.size(), 1u);
    EXPECT_EQ(mapped.annotations[0].target_id, "Q1330839");
    EXPECT_EQ(mapped.annotations[0].target_name, "Hakata-ku,_Fukuoka");
    EXPECT_EQ(mapped.dropped, 0u);

    EXPECT_TRUE(map_to_wikidata({}, *mapping).annotations.empty());

    mapped = map_to_wikidata({make(0, 1, 0.9, "Fukuoka"), make(2, 3, 0.9, "Atlantis"), a}, *mapping);
    EXPECT_EQ(mapped.annotations.size(), 2u);
    EXPECT_EQ(mapped.dropped, 1u);
}

TEST(WikiMappingTable, LoadInMemoryAndOnDisk) {
    testkit::TempDir dir;
    std::string table;
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < 500; ++i) entries.emplace_back("Title_" + std::to_string(i), "Q" + std::to_string(i));
    entries.emplace_back("Hakata-ku,_Fukuoka", "Q1330839");
    std::sort(entries.begin(), entries.end());
    for (const auto& [t, q] : entries) table += t + "\t" + q + "\n";
    const auto path = dir.write("map.tsv", table);

    const auto memory = WikiMapping::load(path);
    const auto disk = WikiMapping::load(path, 0);
    EXPECT_FALSE(memory.on_disk());
    EXPECT_TRUE(disk.on_disk());
    for (const auto& [t, q] : entries) {
        EXPECT_EQ(memory.lookup(t), q);
        EXPECT_EQ(disk.lookup(t), q) << t;
    }
    EXPECT_EQ(memory.lookup("Hakata-ku, Fukuoka"), "Q1330839");
    EXPECT_EQ(disk.lookup("Hakata-ku, Fukuoka"), "Q1330839");
    for (const auto* missing : {"", "A", "Title_", "Title_5000", "zzz"}) {
        EXPECT_FALSE(memory.lookup(missing)) << missing;
        EXPECT_FALSE(disk.lookup(missing)) << missing;
    }
}

TEST(WikiMappingTable, Errors) {
    testkit::TempDir dir;
    EXPECT_THROW(WikiMapping::load(dir / "absent.tsv"), ConfigError);
    EXPECT_THROW(WikiMapping::load(dir.write("bad.tsv", "Title\tX12\n")), FormatError);
    EXPECT_THROW(WikiMapping::load(dir.write("cols.tsv", "no tab here\n")), FormatError);
    EXPECT_THROW(WikiMapping(std::vector<std::pair<std::string, std::string>>{{"A", "P31"}}), FormatError);
}

TEST(SpotlightParse, ThresholdFilter) {
    const auto profile = KnowledgeGraphProfile::builtin(KnowledgeGraph::dbpedia);
    const std::string body = R"({"Resources": [
        {"@URI": "http://dbpedia.org/resource/Hakata-ku,_Fukuoka", "@offset": "9",
         "@surfaceForm": "Hakata Ward", "@similarityScore": "0.99"},
        {"@URI": "http://dbpedia.org/resource/Ward", "@offset": 0,
         "@surfaceForm": "Where", "@similarityScore": 0.30}]})";
    const auto kept = parse_spotlight_response("Where is Hakata Ward?", body, 0.5, profile);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].target_id, "Hakata-ku,_Fukuoka");
    EXPECT_EQ(kept[0].span, (Span{9, 20}));
    EXPECT_EQ(parse_spotlight_response("Where is Hakata Ward?", body, 0.0, profile).size(), 2u);
    EXPECT_TRUE(parse_spotlight_response("q", R"({"@text": "q"})", 0.5, profile).empty());
    EXPECT_THROW(parse_spotlight_response("q", R"({"Resources": [{"@URI": "x"}]})", 0.5, profile),
                 ProtocolError);
}

TEST(SpotlightAnnotate, Utf16OffsetsBecomeScalarSpans) {
    testkit::MockSpotlightEndpoint spotlight({{"Hakata Ward", "http://dbpedia.org/resource/Hakata-ku", 0.9},
                                              {"🌸", "http://dbpedia.org/resource/Sakura", 0.2}});
    HttpClient client(spotlight.url() + "/rest/annotate", fast());
    const auto profile = KnowledgeGraphProfile::builtin(KnowledgeGraph::dbpedia);
    const std::string question = "🌸 in Hakata Ward?";
    const auto annotations = annotate_spotlight(question, client, 0.5, profile);
    ASSERT_EQ(annotations.size(), 1u);
    EXPECT_EQ(annotations[0].span, (Span{5, 16}));
    EXPECT_EQ(utf8::substr(question, 5, 16), "Hakata Ward");
    EXPECT_EQ(annotate_spotlight(question, client, 0.0, profile).size(), 2u);
    EXPECT_THROW(annotate_spotlight(question, client, 1.5, profile), std::invalid_argument);
}

TEST(LinkRecords, ReferenceLinkedLine) {
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{{"Hakata Ward", "Hakata-ku, Fukuoka"}});
    RelLinker linker(rel.url(), std::nullopt, hakata_mapping(), fast());
    QuestionRecord record;
    record.question = "Where is Hakata Ward?";
    const auto linked = link_records({record}, linker);
    ASSERT_EQ(linked.size(), 1u);
    const auto json = linked[0].to_json();
    EXPECT_EQ(json["question_entities"], Json::parse(R"(["Q1330839"])"));
    EXPECT_EQ(json["spans"], Json::parse("[[9,20]]"));
    EXPECT_EQ(json["entity_names"], Json::parse(R"(["Hakata-ku,_Fukuoka"])"));
    EXPECT_NO_THROW(linked[0].validate());
}

TEST(LinkRecords, NoEntitiesGiveEmptyArrays) {
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{});
    RelLinker linker(rel.url(), std::nullopt, hakata_mapping(), fast());
    QuestionRecord record;
    record.question = "nothing to see";
    const auto json = link_records({record}, linker)[0].to_json();
    EXPECT_EQ(json["question_entities"], Json::array());
    EXPECT_EQ(json["spans"], Json::array());
    EXPECT_EQ(json["entity_names"], Json::array());
}

TEST(LinkRecords, FailuresAreRecordedPerRecord) {
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{{"Fukuoka", "Fukuoka"}});
    rel.fail_matching("question 6", 400);
    RelLinker linker(rel.url(), std::nullopt, hakata_mapping(), fast());
    std::vector<QuestionRecord> records(10);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].question = "question " + std::to_string(i) + " about Fukuoka";
    }
    LinkStats stats;
    const auto linked = link_records(records, linker, 4, &stats);
    ASSERT_EQ(linked.size(), 10u);
    EXPECT_EQ(stats.failed, 1u);
    for (std::size_t i = 0; i < linked.size(); ++i) {
        EXPECT_EQ(linked[i].question, records[i].question);
        EXPECT_EQ(linked[i].extra.contains("error"), i == 6) << i;
        EXPECT_EQ(linked[i].question_entities->size(), i == 6 ? 0u : 1u);
        EXPECT_EQ(linked[i].spans->size(), linked[i].question_entities->size());
        EXPECT_EQ(linked[i].entity_names->size(), linked[i].question_entities->size());
    }
}

TEST(LinkRecords, DropsAreCounted) {
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{{"Fukuoka", "Fukuoka"}, {"Atlantis", "Atlantis"}});
    RelLinker linker(rel.url(), std::nullopt, hakata_mapping(), fast());
    QuestionRecord record;
    record.question = "Fukuoka or Atlantis";
    const auto linked = link_records({record}, linker);
    EXPECT_EQ(*linked[0].question_entities, std::vector<std::string>{"Q26600"});
    EXPECT_EQ(linker.dropped(), 1u);
}
