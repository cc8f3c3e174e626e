#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "srtk/cli.hpp"
#include "srtk/errors.hpp"
#include "srtk/memory_source.hpp"
#include "srtk/testkit/fixtures.hpp"
#include "srtk/testkit/mock_endpoints.hpp"
#include "srtk/testkit/oracles.hpp"

using namespace srtk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<Json> read_lines(const fs::path& path) {
    std::ifstream in(path);
    std::vector<Json> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(Json::parse(line));
    return lines;
}

std::string fixture_text(const TripleStoreFixture& f) {
    std::ostringstream text;
    f.write(text);
    return text.str();
}

std::string hakata_questions(std::size_t n, std::size_t failing) {
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string entity = i == failing ? "Q999" : testkit::kHakata;
        text += R"({"id": "r)" + std::to_string(i) + R"(", "question": "Where is Hakata Ward?", "question_entities": [")" +
                entity + R"("], "answer_entities": ["Q17"]})" + "\n";
    }
    return text;
}

}  // namespace

TEST(ResolveProfile, BuiltinsAndOverrides) {
    const auto wikidata = cli::resolve_profile("wikidata");
    EXPECT_EQ(wikidata.name, KnowledgeGraph::wikidata);
    EXPECT_FALSE(wikidata.sparql_endpoint.empty());
    EXPECT_EQ(cli::resolve_profile("dbpedia", std::string("http://h/sparql")).sparql_endpoint, "http://h/sparql");
    EXPECT_THROW(cli::resolve_profile("custom"), ConfigError);
    EXPECT_NO_THROW(cli::resolve_profile("custom", std::nullopt, false));
    EXPECT_THROW(cli::resolve_profile("nonexistent-graph"), ConfigError);
}

TEST(ResolveProfile, JsonFile) {
    testkit::TempDir dir;
    const auto good = dir.write("kg.json", R"({"sparql_endpoint": "http://localhost:1/q",
        "entity_prefix": "http://ex.org/e/", "relation_prefix": "http://ex.org/r/",
        "label_predicate": "http://ex.org/label", "result_cap": 50, "request_timeout_ms": 1000})");
    const auto profile = cli::resolve_profile(good.string());
    EXPECT_EQ(profile.name, KnowledgeGraph::custom);
    EXPECT_EQ(profile.entity_prefix, "http://ex.org/e/");
    EXPECT_EQ(profile.result_cap, 50u);
    EXPECT_EQ(profile.request_timeout, std::chrono::milliseconds(1000));
    const auto based = dir.write("wd.json", R"({"name": "wikidata", "result_cap": 7})");
    EXPECT_EQ(cli::resolve_profile(based.string()).entity_prefix,
              KnowledgeGraphProfile::builtin(KnowledgeGraph::wikidata).entity_prefix);
    EXPECT_THROW(cli::resolve_profile(dir.write("x.json", R"({"colour": 1})").string()), ConfigError);
    EXPECT_THROW(cli::resolve_profile(dir.write("y.json", "not json").string()), ConfigError);
    EXPECT_THROW(cli::resolve_profile(dir.write("z.json", R"({"result_cap": "many"})").string()), ConfigError);
}

TEST(MakeScorer, Specs) {
    EXPECT_NE(dynamic_cast<LexicalScorer*>(cli::make_scorer("lexical").get()), nullptr);
    EXPECT_NE(dynamic_cast<EmbeddingScorer*>(cli::make_scorer("http://127.0.0.1:9/").get()), nullptr);
    EXPECT_THROW(cli::make_scorer("artifacts/scorer"), ConfigError);
    EXPECT_THROW(cli::make_scorer("sentence-transformers/all-MiniLM-L6-v2"), ConfigError);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({"retrieve"}).code, 2);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    const auto train = run_cli({"train", "--anything"});
    EXPECT_EQ(train.code, 2);
    EXPECT_NE(train.err.find("srtk-train"), std::string::npos);
}

TEST(Cli, CustomGraphWithoutEndpointWritesNothing) {
    testkit::TempDir dir;
    const auto input = dir.write("in.jsonl", hakata_questions(1, 99));
    const auto output = dir / "out.jsonl";
    const auto result = run_cli({"retrieve", "-i", input.string(), "-o", output.string(),
                                 "--knowledge-graph", "custom"});
    EXPECT_EQ(result.code, 2);
    EXPECT_FALSE(fs::exists(output));
    EXPECT_NE(result.err.find("--sparql-endpoint"), std::string::npos);
}

TEST(Cli, MalformedInputIsConfigError) {
    testkit::TempDir dir;
    const auto input = dir.write("in.jsonl", "{\"question\": \"ok\"}\n{broken\n");
    const auto output = dir / "out.jsonl";
    const auto result = run_cli({"retrieve", "-i", input.string(), "-o", output.string(),
                                 "--knowledge-graph", "custom", "--kg-file",
                                 dir.write("g.tsv", fixture_text(testkit::g0_fixture())).string()});
    EXPECT_EQ(result.code, 2);
    EXPECT_NE(result.err.find("line 2"), std::string::npos);
    EXPECT_FALSE(fs::exists(output));
}

TEST(Cli, RetrieveModelPathHubIdRejected) {
    testkit::TempDir dir;
    const auto input = dir.write("in.jsonl", hakata_questions(1, 99));
    const auto result = run_cli({"retrieve", "-i", input.string(), "--evaluate", "--knowledge-graph",
                                 "custom", "--sparql-endpoint", "http://127.0.0.1:1/sparql",
                                 "--scorer-model-path", "artifacts/scorer"});
    EXPECT_EQ(result.code, 2);
    EXPECT_NE(result.err.find("srtk-serve"), std::string::npos);
}

TEST(Cli, RetrievePartialFailure) {
    testkit::TempDir dir;
    testkit::MockSparqlEndpoint sparql(testkit::hakata_fixture(), testkit::custom_profile());
    sparql.fail_matching("Q999", 400);
    const auto input = dir.write("in.jsonl", hakata_questions(5, 2));
    const auto output = dir / "out.jsonl";
    const auto result = run_cli({"retrieve", "-i", input.string(), "-o", output.string(), "--knowledge-graph",
                                 "custom", "--sparql-endpoint", sparql.endpoint(), "--evaluate",
                                 "--include-paths", "--jobs", "2"});
    EXPECT_EQ(result.code, 1) << result.err;
    const auto lines = read_lines(output);
    ASSERT_EQ(lines.size(), 5u);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        EXPECT_EQ(lines[i]["id"], "r" + std::to_string(i));
        EXPECT_EQ(lines[i].contains("error"), i == 2);
        EXPECT_TRUE(lines[i]["triples"].is_array());
        EXPECT_EQ(lines[i].contains("paths"), i != 2);
    }
    EXPECT_TRUE(lines[2]["triples"].empty());
    EXPECT_EQ(lines[0]["paths"].size(), 2u);
    EXPECT_NE(result.out.find("(4 / 5)"), std::string::npos);
    EXPECT_NE(result.out.find("Average subgraph size: "), std::string::npos);
}

TEST(Cli, RetrieveRequiresOutputWithoutEvaluate) {
    testkit::TempDir dir;
    const auto input = dir.write("in.jsonl", hakata_questions(1, 99));
    EXPECT_EQ(run_cli({"retrieve", "-i", input.string(), "--knowledge-graph", "custom", "--sparql-endpoint",
                       "http://127.0.0.1:1/sparql"})
                  .code,
              2);
}

TEST(Cli, PreprocessSupervisedFromFixtureFile) {
    testkit::TempDir dir;
    const auto kg = dir.write("g0.tsv", fixture_text(testkit::g0_fixture()));
    const auto input = dir.write("in.jsonl", R"({"question": "q", "question_entities": ["E1"], "paths": [["Rloc"]]})"
                                             "\n");
    const auto output = dir / "samples.jsonl";
    const auto result = run_cli({"preprocess", "-i", input.string(), "-o", output.string(), "--knowledge-graph",
                                 "custom", "--kg-file", kg.string(), "--num-negative", "1"});
    EXPECT_EQ(result.code, 0) << result.err;
    const auto lines = read_lines(output);
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0]["query"], "q [SEP]");
    EXPECT_EQ(lines[0]["positive"], "located in");
    EXPECT_EQ(lines[0]["negatives"].size(), 1u);
    EXPECT_EQ(lines[1]["positive"], "END");
}

TEST(Cli, VisualizeWritesSelfContainedPages) {
    testkit::TempDir dir;
    const auto kg = dir.write("h.tsv", fixture_text(testkit::hakata_fixture()));
    const auto input = dir.write(
        "r.jsonl", R"({"id": "hakata", "question": "Where is Hakata Ward?", "question_entities": ["Q1330839"], "triples": [["Q1330839","P31","Q26600"], ["Q1330839","P17","Q17"]]})"
                   "\n"
                   R"({"question": "empty", "triples": []})"
                   "\n");
    const auto pages = dir / "pages";
    const auto result = run_cli({"visualize", "-i", input.string(), "--output-dir", pages.string(),
                                 "--knowledge-graph", "custom", "--kg-file", kg.string()});
    EXPECT_EQ(result.code, 0) << result.err;
    std::ifstream in(pages / "hakata.html");
    std::stringstream html;
    html << in.rdbuf();
    EXPECT_NE(html.str().find("Fukuoka"), std::string::npos);
    EXPECT_NE(html.str().find("Japan"), std::string::npos);
    EXPECT_TRUE(testkit::external_references(html.str()).empty());
    EXPECT_TRUE(fs::exists(pages / "1.html"));

    const auto bad_template = dir.write("t.html", "<html>{{GRAPH_DATA}}</html>");
    EXPECT_EQ(run_cli({"visualize", "-i", input.string(), "--output-dir", (dir / "other").string(),
                       "--knowledge-graph", "custom", "--kg-file", kg.string(), "--template",
                       bad_template.string()})
                  .code,
              2);
    EXPECT_FALSE(fs::exists(dir / "other"));
}

TEST(Cli, LinkWithRelAndMapping) {
    testkit::TempDir dir;
    testkit::MockRelEndpoint rel(std::vector<std::pair<std::string, std::string>>{{"Hakata Ward", "Hakata-ku, Fukuoka"}}, std::string("token"));
    const auto mapping = dir.write("map.tsv", "Fukuoka\tQ26600\nHakata-ku,_Fukuoka\tQ1330839\n");
    const auto input = dir.write("q.jsonl", "{\"question\": \"Where is Hakata Ward?\"}\n");
    const auto output = dir / "linked.jsonl";
    std::vector<std::string> args{"link", "-i", input.string(), "-o", output.string(), "--el-endpoint",
                                  rel.url(), "--wikimapper-db", mapping.string()};
    args.insert(args.end(), {"--authorization", "token"});
    const auto result = run_cli(args);
    EXPECT_EQ(result.code, 0) << result.err;
    const auto lines = read_lines(output);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0], Json::parse(R"({"question": "Where is Hakata Ward?", "question_entities": ["Q1330839"],
                                        "spans": [[9,20]], "entity_names": ["Hakata-ku,_Fukuoka"]})"));
    args.resize(args.size() - 2);
    args.insert(args.end(), {"--authorization", "wrong"});
    EXPECT_EQ(run_cli(args).code, 1);
    EXPECT_EQ(run_cli({"link", "-i", input.string(), "-o", output.string(), "--el-endpoint", rel.url()}).code, 2);
    EXPECT_EQ(run_cli({"link", "-i", input.string(), "-o", output.string(), "--el-endpoint", rel.url(),
                       "--knowledge-graph", "freebase"})
                  .code,
              2);
}
