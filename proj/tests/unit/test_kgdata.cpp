#include <gtest/gtest.h>

#include <sstream>

#include "srtk/errors.hpp"
#include "srtk/kgdata.hpp"
#include "srtk/testkit/fixtures.hpp"
#include "srtk/utf8.hpp"

using namespace srtk;

namespace {

std::vector<QuestionRecord> parse_all(const std::string& text) {
    std::istringstream in(text);
    std::vector<QuestionRecord> out;
    for (const auto& r : read_records(in)) out.push_back(r);
    return out;
}

const char* kWords[] = {"Where", "is", "Hakata", "Ward?", "東京", "naïve", "x", "\"quoted\"", "🌸"};

QuestionRecord random_record(testkit::Rng& rng, std::size_t index) {
    QuestionRecord r;
    if (rng.chance(1, 2)) r.id = "rec-" + std::to_string(index);
    std::string q;
    const auto words = rng.between(1, 6);
    for (std::size_t i = 0; i < words; ++i) {
        if (i) q += ' ';
        q += kWords[rng.below(std::size(kWords))];
    }
    r.question = q;
    const auto len = utf8::length(q);
    if (rng.chance(2, 3)) {
        const auto n = rng.below(3);
        r.question_entities.emplace();
        r.spans.emplace();
        r.entity_names.emplace();
        for (std::size_t i = 0; i < n; ++i) {
            const auto start = rng.below(len);
            const auto end = rng.between(start + 1, len);
            r.question_entities->push_back("Q" + std::to_string(rng.below(100000)));
            r.spans->push_back({start, end});
            r.entity_names->push_back(utf8::substr(q, start, end));
        }
    }
    if (rng.chance(1, 2)) {
        r.answer_entities.emplace();
        for (std::size_t i = rng.below(3); i > 0; --i) {
            r.answer_entities->push_back("Q" + std::to_string(rng.below(100000)));
        }
    }
    if (rng.chance(1, 3)) r.extra["source"] = Json{{"split", "test"}, {"n", rng.below(10)}};
    return r;
}

}  // namespace

TEST(ReadRecords, QuestionOnlyLine) {
    const auto records = parse_all("{\"question\": \"Where is Hakata Ward?\"}\n");
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].question, "Where is Hakata Ward?");
    EXPECT_FALSE(records[0].question_entities);
    EXPECT_FALSE(records[0].spans);
    EXPECT_FALSE(records[0].entity_names);
    EXPECT_FALSE(records[0].answer_entities);
    EXPECT_FALSE(records[0].id);
}

TEST(ReadRecords, EmptyStream) {
    EXPECT_TRUE(parse_all("").empty());
    EXPECT_TRUE(parse_all("\n\n  \n").empty());
}

TEST(ReadRecords, EntityLists) {
    const auto records = parse_all(
        R"({"question":"q","question_entities":["Q1330839"],"answer_entities":["Q26600"]})");
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(*records[0].question_entities, std::vector<std::string>{"Q1330839"});
    EXPECT_EQ(*records[0].answer_entities, std::vector<std::string>{"Q26600"});
}

TEST(ReadRecords, MalformedLineNamesLine) {
    try {
        parse_all("{\"question\": \"a\"}\n\n{\"question\": \n");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ReadRecords, TypeMismatchNamesField) {
    try {
        parse_all(R"({"question": "a", "answer_entities": "Q1"})");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("answer_entities"), std::string::npos) << e.what();
    }
}

TEST(ReadRecords, NullEqualsAbsent) {
    const auto a = parse_all(R"({"question": "a", "spans": null, "answer_entities": null})");
    const auto b = parse_all(R"({"question": "a"})");
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0], b[0]);
}

TEST(ReadRecords, UnknownFieldsSurviveRoundTrip) {
    const auto records = parse_all(R"({"question": "a", "topic": {"x": [1, 2]}, "rank": 3})");
    std::ostringstream out;
    write_records<QuestionRecord>(records, out);
    EXPECT_EQ(out.str(), "{\"question\":\"a\",\"topic\":{\"x\":[1,2]},\"rank\":3}\n");
}

TEST(QuestionRecordValidate, SpanInvariants) {
    EXPECT_THROW(parse_all(R"({"question": "abc", "question_entities": ["Q1"], "spans": []})"),
                 FormatError);
    EXPECT_THROW(parse_all(R"({"question": "abc", "question_entities": ["Q1"], "spans": [[1, 4]]})"),
                 FormatError);
    EXPECT_THROW(parse_all(R"({"question": "abc", "question_entities": ["Q1"], "spans": [[2, 2]]})"),
                 FormatError);
    EXPECT_THROW(parse_all(R"({"question": "abc", "question_entities": ["Q 1"]})"), FormatError);
    EXPECT_NO_THROW(parse_all(R"({"question": "abc", "question_entities": ["Q1"], "spans": [[0, 3]]})"));
}

TEST(QuestionRecordValidate, SpansCountScalarValues) {
    // "東京" is 2 scalar values but 6 bytes.
    EXPECT_NO_THROW(parse_all(R"({"question": "東京", "question_entities": ["Q1"], "spans": [[0, 2]]})"));
    EXPECT_THROW(parse_all(R"({"question": "東京", "question_entities": ["Q1"], "spans": [[0, 3]]})"),
                 FormatError);
}

TEST(WriteRecords, ReferenceTriplesLine) {
    RetrievalResult result;
    result.subgraph.add({"Q1330839", "P31", "Q26600"});
    result.subgraph.add({"Q1330839", "P17", "Q17"});
    std::ostringstream out;
    JsonlWriter(out).write_record(result);
    const auto expected = Json::parse(R"({"triples": [["Q1330839","P31","Q26600"],["Q1330839","P17","Q17"]]})");
    EXPECT_EQ(Json::parse(out.str()), expected);
}

TEST(WriteRecords, EmptyListWritesNothing) {
    std::ostringstream out;
    EXPECT_EQ(write_records<QuestionRecord>({}, out), 0u);
    EXPECT_EQ(out.str(), "");
}

TEST(WriteRecords, ByteCountMatchesOutput) {
    std::vector<QuestionRecord> records(2);
    records[0].question = "a";
    records[1].question = "東京";
    std::ostringstream out;
    const auto written = write_records<QuestionRecord>(records, out);
    EXPECT_EQ(written, out.str().size());
}

TEST(WriteRecords, RejectsInvalidUtf8) {
    QuestionRecord r;
    r.question = std::string("bad \xff byte");
    std::ostringstream out;
    EXPECT_THROW(JsonlWriter(out).write_record(r), FormatError);
}

TEST(WriteRecords, RoundTripRandomRecords) {
    testkit::Rng rng(20240611);
    std::vector<QuestionRecord> records;
    for (std::size_t i = 0; i < 100; ++i) records.push_back(random_record(rng, i));
    std::ostringstream out;
    write_records<QuestionRecord>(records, out);
    const auto back = parse_all(out.str());
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(back[i], records[i]) << "record " << i;

    std::ostringstream again;
    write_records<QuestionRecord>(back, again);
    EXPECT_EQ(again.str(), out.str());
}

TEST(RetrievalResultJson, PathsAndTriplesRoundTrip) {
    RetrievalResult result;
    result.record.question = "where";
    result.record.question_entities = std::vector<std::string>{"E1"};
    result.paths = std::vector<ExpansionPath>{{{"Rloc"}, false, -0.5}, {{}, true, -1.25}};
    result.subgraph.add({"E1", "Rloc", "E2"});
    const auto back = RetrievalResult::from_json(Json::parse(result.to_json().dump()));
    EXPECT_EQ(back, result);
}

TEST(RetrievalResultJson, GoldPathListsStayInExtra) {
    const auto json = Json::parse(R"({"question": "q", "paths": [["P31"]], "triples": []})");
    const auto result = RetrievalResult::from_json(json);
    EXPECT_FALSE(result.paths);
    EXPECT_EQ(result.record.extra["paths"], Json::parse(R"([["P31"]])"));
}

TEST(SubgraphModel, DeduplicatesAndRejectsEmptyPositions) {
    Subgraph g;
    EXPECT_TRUE(g.add({"a", "r", "b"}));
    EXPECT_FALSE(g.add({"a", "r", "b"}));
    EXPECT_EQ(g.size(), 1u);
    EXPECT_THROW(g.add({"a", "", "b"}), FormatError);
}

TEST(TrainSampleJson, ReferenceLine) {
    const auto json = Json::parse(R"({"query": "Where is Hakata Ward? [SEP]",
 "positive": "located in the administrative entity",
 "negatives": ["located in time zone","different from"]})");
    const auto sample = TrainSample::from_json(json);
    EXPECT_EQ(sample.query, "Where is Hakata Ward? [SEP]");
    EXPECT_EQ(sample.negatives.size(), 2u);
    EXPECT_EQ(sample.to_json(), json);
}

TEST(TrainSampleJson, PositiveAmongNegativesRejected) {
    EXPECT_THROW(TrainSample::from_json(Json::parse(R"({"query": "q", "positive": "a", "negatives": ["a"]})")),
                 FormatError);
    EXPECT_THROW(TrainSample::from_json(Json::parse(R"({"query": "q", "positive": "a", "negatives": ["b", "b"]})")),
                 FormatError);
}

TEST(ComposeQuery, SeparatorAndLabels) {
    EXPECT_EQ(compose_query("Where is Hakata Ward?", {}), "Where is Hakata Ward? [SEP]");
    const std::vector<std::string> labels{"located in", "country"};
    EXPECT_EQ(compose_query("q", labels), "q [SEP] located in country");
}

TEST(Utf8, ScalarIndexing) {
    const std::string q = "Where is Hakata Ward?";
    EXPECT_EQ(utf8::substr(q, 9, 20), "Hakata Ward");
    EXPECT_EQ(utf8::length("東京 🌸"), 4u);
    EXPECT_EQ(utf8::substr("東京 🌸", 3, 4), "🌸");
    EXPECT_FALSE(utf8::is_valid("\xc3"));
    EXPECT_THROW(utf8::length("\xc3("), FormatError);
    EXPECT_EQ(utf8::normalize_whitespace("  a \t b\n"), "a b");
}
