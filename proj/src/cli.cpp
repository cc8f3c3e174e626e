#include "srtk/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "srtk/errors.hpp"
#include "srtk/evaluator.hpp"
#include "srtk/expander.hpp"
#include "srtk/linker.hpp"
#include "srtk/memory_source.hpp"
#include "srtk/parallel.hpp"
#include "srtk/preprocess.hpp"
#include "srtk/sparql_source.hpp"
#include "srtk/visualizer.hpp"

namespace srtk::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kAuthorizationEnv = "SRTK_EL_AUTHORIZATION";

bool is_builtin_name(std::string_view name) {
    return name == "wikidata" || name == "freebase" || name == "dbpedia" || name == "custom";
}

std::chrono::milliseconds millis(const Json& value, std::string_view field) {
    if (!value.is_number()) throw ConfigError(std::string(field) + " must be a number");
    return std::chrono::milliseconds(value.get<long long>());
}

void apply_profile_file(KnowledgeGraphProfile& p, const Json& doc) {
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "name") {
                continue;
            } else if (key == "sparql_endpoint") {
                p.sparql_endpoint = value.get<std::string>();
            } else if (key == "entity_prefix") {
                p.entity_prefix = value.get<std::string>();
            } else if (key == "relation_prefix") {
                p.relation_prefix = value.get<std::string>();
            } else if (key == "label_predicate") {
                p.label_predicate = value.get<std::string>();
            } else if (key == "relation_blocklist") {
                p.relation_blocklist = value.get<std::vector<std::string>>();
            } else if (key == "request_timeout_ms") {
                p.request_timeout = millis(value, key);
            } else if (key == "max_retries") {
                p.max_retries = value.get<int>();
            } else if (key == "retry_backoff_ms") {
                p.retry_backoff = millis(value, key);
            } else if (key == "min_request_interval_ms") {
                p.min_request_interval = millis(value, key);
            } else if (key == "max_in_flight") {
                p.max_in_flight = value.get<std::size_t>();
            } else if (key == "result_cap") {
                p.result_cap = value.get<std::size_t>();
            } else {
                throw ConfigError("unknown profile field '" + key + "'");
            }
        } catch (const Json::exception& e) {
            throw ConfigError("profile field '" + key + "': " + e.what());
        }
    }
}

std::vector<QuestionRecord> load_questions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    std::vector<QuestionRecord> records;
    try {
        for (auto& record : read_records(in)) records.push_back(record);
    } catch (const FormatError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return records;
}

std::vector<RetrievalResult> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    std::vector<RetrievalResult> results;
    try {
        RecordStream<RetrievalResult> stream(in);
        for (auto& result : stream) results.push_back(result);
    } catch (const FormatError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return results;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

struct GraphFlags {
    std::string knowledge_graph = "wikidata";
    std::optional<std::string> sparql_endpoint;
    std::optional<std::string> kg_file;

    void attach(CLI::App& app) {
        app.add_option("--knowledge-graph", knowledge_graph,
                       "wikidata, freebase, dbpedia, custom, or a JSON profile file")
            ->capture_default_str();
        app.add_option("--sparql-endpoint", sparql_endpoint, "SPARQL endpoint URL");
        app.add_option("--kg-file", kg_file, "Serve the graph from a local triple fixture file");
    }

    KnowledgeGraphProfile profile(bool need_endpoint = true) const {
        return resolve_profile(knowledge_graph, sparql_endpoint, need_endpoint && !kg_file);
    }
};

struct ScorerFlags {
    std::string scorer = "lexical";
    std::optional<std::string> model_path;

    void attach(CLI::App& app) {
        app.add_option("--scorer", scorer, "lexical, or the URL of an embedding endpoint")
            ->capture_default_str();
        app.add_option("--scorer-model-path", model_path, "Alias of --scorer");
    }

    std::string spec() const { return model_path ? *model_path : scorer; }
};

// Each subcommand validates its configuration, processes every record, then writes.
// A thrown ConfigError before the output is opened means nothing was written.

struct LinkCommand {
    std::string input, output;
    GraphFlags graph;
    std::optional<std::string> el_endpoint, wikimapper_db, authorization;
    double confidence = SpotlightLinker::kDefaultConfidence;
    std::size_t jobs = 4;

    int execute() {
        const auto profile = graph.profile(false);
        if (!el_endpoint) throw ConfigError("--el-endpoint is required");
        std::unique_ptr<EntityLinker> linker;
        const HttpOptions http{profile.request_timeout, profile.max_retries,
                               profile.retry_backoff, profile.min_request_interval,
                               profile.max_in_flight};
        if (profile.name == KnowledgeGraph::wikidata) {
            if (!wikimapper_db) throw ConfigError("--wikimapper-db is required for wikidata");
            auto mapping = std::make_shared<const WikiMapping>(WikiMapping::load(*wikimapper_db));
            auto token = authorization;
            if (!token) {
                if (const char* env = std::getenv(kAuthorizationEnv.data())) token = env;
            }
            linker = std::make_unique<RelLinker>(*el_endpoint, token, mapping, http);
        } else if (profile.name == KnowledgeGraph::dbpedia) {
            linker = std::make_unique<SpotlightLinker>(*el_endpoint, confidence, profile, http);
        } else {
            throw ConfigError("entity linking supports wikidata and dbpedia only");
        }
        auto records = load_questions(input);
        spdlog::info("linking {} records", records.size());
        LinkStats stats;
        const auto linked = link_records(std::move(records), *linker, jobs, &stats);
        auto out = open_output(output);
        write_records<QuestionRecord>(linked, out);
        spdlog::info("linked {} records, {} failed", stats.records, stats.failed);
        return stats.failed ? kRecordErrors : kSuccess;
    }
};

struct PreprocessCommand {
    std::string input, output;
    GraphFlags graph;
    bool search_path = false;
    std::string metric = "jaccard";
    std::size_t num_negative = 2;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    std::size_t jobs = 4;

    int execute() {
        if (threshold < 0.0 || threshold > 1.0) throw ConfigError("--threshold must be in [0, 1]");
        SampleOptions options;
        options.threshold = threshold;
        options.num_negative = num_negative;
        options.seed = seed;
        options.search_path = search_path;
        options.metric = metric_by_name(metric);
        const auto source = make_source(graph.profile(), graph.kg_file);
        const auto records = load_questions(input);
        LabelCache labels(*source);
        std::atomic<std::size_t> failed{0};
        spdlog::info("preprocessing {} records", records.size());
        const auto samples = parallel_map(records.size(), jobs, [&](std::size_t i) {
            try {
                return generate_samples(records[i], i, *source, labels, options);
            } catch (const std::exception& e) {
                spdlog::error("record {}: {}", i + 1, e.what());
                ++failed;
                return std::vector<TrainSample>{};
            }
        });
        auto out = open_output(output);
        JsonlWriter writer(out);
        std::size_t count = 0;
        for (const auto& group : samples) {
            for (const auto& sample : group) {
                writer.write_record(sample);
                ++count;
            }
        }
        spdlog::info("wrote {} samples, {} records failed", count, failed.load());
        return failed ? kRecordErrors : kSuccess;
    }
};

struct RetrieveCommand {
    std::string input;
    std::optional<std::string> output;
    GraphFlags graph;
    ScorerFlags scorer;
    std::size_t beam_width = 2;
    std::size_t max_depth = 1;
    bool evaluate_coverage = false;
    bool include_paths = false;
    std::size_t jobs = 4;

    int execute(std::ostream& stdout_stream) {
        if (beam_width == 0) throw ConfigError("--beam-width must be >= 1");
        if (!output && !evaluate_coverage) throw ConfigError("--output is required without --evaluate");
        const auto profile = graph.profile();
        const auto source = make_source(profile, graph.kg_file);
        const auto scorer_backend = make_scorer(scorer.spec());
        const auto records = load_questions(input);
        Retriever retriever(*source, *scorer_backend, {beam_width, max_depth, 1.0, 10'000});
        EvalReport report;
        std::mutex report_mutex;
        spdlog::info("retrieving subgraphs for {} records", records.size());
        const auto lines = parallel_map(records.size(), jobs, [&](std::size_t i) {
            const auto& record = records[i];
            EntitySet answers;
            if (record.answer_entities) {
                answers.insert(record.answer_entities->begin(), record.answer_entities->end());
            }
            try {
                auto result = retriever.retrieve(record);
                {
                    std::lock_guard lock(report_mutex);
                    report.add(result.subgraph, answers);
                }
                if (!include_paths) result.paths.reset();
                return std::pair{result.to_json(), true};
            } catch (const std::exception& e) {
                spdlog::error("record {}: {}", i + 1, e.what());
                {
                    std::lock_guard lock(report_mutex);
                    report.add_failure();
                }
                RetrievalResult failed{record, std::nullopt, {}};
                auto json = failed.to_json();
                json["error"] = e.what();
                return std::pair{std::move(json), false};
            }
        });
        if (output) {
            auto out = open_output(*output);
            JsonlWriter writer(out);
            for (const auto& [json, ok] : lines) writer.write(json);
        }
        if (evaluate_coverage) stdout_stream << report.format();
        spdlog::info("retrieved {} records, {} failed", records.size(), report.failed);
        return report.failed ? kRecordErrors : kSuccess;
    }
};

struct VisualizeCommand {
    std::string input;
    std::string output_dir = "visualization";
    GraphFlags graph;
    std::optional<std::string> template_path;
    std::size_t jobs = 4;

    int execute() {
        const std::string page_template =
            template_path ? read_file(*template_path) : std::string(default_html_template());
        // Surface a template without placeholders before anything is written.
        render_html(GraphDocument{}, page_template);
        const auto source = make_source(graph.profile(), graph.kg_file);
        const auto results = load_results(input);
        std::error_code ec;
        fs::create_directories(output_dir, ec);
        if (ec) throw ConfigError("cannot create '" + output_dir + "': " + ec.message());
        LabelCache labels(*source);
        std::atomic<std::size_t> failed{0};
        parallel_map(results.size(), jobs, [&](std::size_t i) {
            const auto& result = results[i];
            try {
                std::set<std::string> ids;
                for (const auto& t : result.subgraph.triples()) {
                    ids.insert(t.subject);
                    ids.insert(t.predicate);
                    ids.insert(t.object);
                }
                const auto doc = build_graph_document(result, labels.labels(ids));
                const auto path = fs::path(output_dir) / (page_name(result.record, i) + ".html");
                std::ofstream out(path, std::ios::binary | std::ios::trunc);
                out << render_html(doc, page_template);
                if (!out) throw std::runtime_error("cannot write " + path.string());
            } catch (const std::exception& e) {
                spdlog::error("record {}: {}", i + 1, e.what());
                ++failed;
            }
            return 0;
        });
        spdlog::info("rendered {} pages into {}", results.size() - failed, output_dir);
        return failed ? kRecordErrors : kSuccess;
    }
};

std::shared_ptr<spdlog::logger> stream_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    auto logger = std::make_shared<spdlog::logger>("srtk", sink);
    logger->set_pattern("[%l] %v");
    return logger;
}

// Routes the default logger to `err` for the duration of one run.
class LoggerScope {
public:
    explicit LoggerScope(std::ostream& err) : previous_(spdlog::default_logger()) {
        spdlog::set_default_logger(stream_logger(err));
    }
    ~LoggerScope() { spdlog::set_default_logger(previous_); }

private:
    std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

KnowledgeGraphProfile resolve_profile(std::string_view name_or_path,
                                      const std::optional<std::string>& endpoint_override,
                                      bool require_endpoint) {
    KnowledgeGraphProfile profile;
    if (is_builtin_name(name_or_path)) {
        profile = KnowledgeGraphProfile::builtin(knowledge_graph_from_string(name_or_path));
    } else {
        const std::string path(name_or_path);
        if (!fs::is_regular_file(path)) {
            throw ConfigError("unknown knowledge graph '" + path +
                              "' (not a built-in name or a profile file)");
        }
        Json doc;
        try {
            doc = Json::parse(read_file(path));
        } catch (const Json::parse_error& e) {
            throw ConfigError("profile file '" + path + "': " + e.what());
        }
        if (!doc.is_object()) throw ConfigError("profile file '" + path + "' is not an object");
        const auto base = doc.contains("name") ? doc["name"].get<std::string>() : "custom";
        profile = KnowledgeGraphProfile::builtin(knowledge_graph_from_string(base));
        apply_profile_file(profile, doc);
    }
    if (endpoint_override) profile.sparql_endpoint = *endpoint_override;
    profile.validate();
    if (require_endpoint && profile.sparql_endpoint.empty()) {
        throw ConfigError("knowledge graph '" + std::string(to_string(profile.name)) +
                          "' needs --sparql-endpoint");
    }
    return profile;
}

std::unique_ptr<KnowledgeSource> make_source(const KnowledgeGraphProfile& profile,
                                             const std::optional<std::string>& kg_file) {
    if (kg_file) {
        return std::make_unique<InMemorySource>(TripleStoreFixture::load(*kg_file), profile);
    }
    return std::make_unique<SparqlSource>(profile);
}

std::unique_ptr<Scorer> make_scorer(std::string_view spec, HttpOptions options) {
    if (spec == "lexical") return std::make_unique<LexicalScorer>();
    if (spec.starts_with("http://") || spec.starts_with("https://")) {
        return std::make_unique<EmbeddingScorer>(
            std::make_shared<EmbeddingClient>(spec, EmbeddingClient::kDefaultBatchSize, options));
    }
    throw ConfigError("scorer '" + std::string(spec) +
                      "' is neither 'lexical' nor an endpoint URL; serve the model with "
                      "srtk-serve and pass its URL");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    LoggerScope logging(err);

    CLI::App app{"Subgraph retrieval toolkit"};
    app.name("srtk");
    app.require_subcommand(1);

    auto add_io = [](CLI::App* cmd, std::string& input, std::string* output) {
        cmd->add_option("-i,--input", input, "Input JSONL file")->required();
        if (output) cmd->add_option("-o,--output", *output, "Output JSONL file")->required();
    };
    auto add_optional_output = [](CLI::App* cmd, std::optional<std::string>& output) {
        cmd->add_option("-o,--output", output, "Output JSONL file (optional with --evaluate)");
    };
    auto add_jobs = [](CLI::App* cmd, std::size_t& jobs) {
        cmd->add_option("--jobs", jobs, "Records processed concurrently")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    LinkCommand link;
    auto* link_cmd = app.add_subcommand("link", "Link question mentions to graph entities");
    add_io(link_cmd, link.input, &link.output);
    link.graph.attach(*link_cmd);
    link_cmd->add_option("--el-endpoint", link.el_endpoint, "Entity linking service URL");
    link_cmd->add_option("--wikimapper-db", link.wikimapper_db,
                         "Sorted title<TAB>QID table mapping Wikipedia titles to Wikidata");
    link_cmd->add_option("--authorization", link.authorization,
                         "Authorization header for the linking service (or " +
                             std::string(kAuthorizationEnv) + ")");
    link_cmd->add_option("--confidence", link.confidence, "Spotlight confidence threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    add_jobs(link_cmd, link.jobs);

    PreprocessCommand pre;
    auto* pre_cmd = app.add_subcommand("preprocess", "Build scorer training samples");
    add_io(pre_cmd, pre.input, &pre.output);
    pre.graph.attach(*pre_cmd);
    pre_cmd->add_flag("--search-path", pre.search_path,
                      "Search answer paths instead of reading gold paths");
    pre_cmd->add_option("--metric", pre.metric, "Path agreement metric")->capture_default_str();
    pre_cmd->add_option("--num-negative", pre.num_negative, "Negatives per sample")
        ->capture_default_str();
    pre_cmd->add_option("--threshold", pre.threshold, "Minimum path agreement")
        ->capture_default_str();
    pre_cmd->add_option("--seed", pre.seed, "Negative sampling seed")->capture_default_str();
    add_jobs(pre_cmd, pre.jobs);

    RetrieveCommand ret;
    auto* ret_cmd = app.add_subcommand("retrieve", "Retrieve a subgraph for every question");
    add_io(ret_cmd, ret.input, nullptr);
    add_optional_output(ret_cmd, ret.output);
    ret.graph.attach(*ret_cmd);
    ret.scorer.attach(*ret_cmd);
    ret_cmd->add_option("--beam-width", ret.beam_width, "Paths kept per step")
        ->capture_default_str();
    ret_cmd->add_option("--max-depth", ret.max_depth, "Maximum path length")
        ->capture_default_str();
    ret_cmd->add_flag("--evaluate", ret.evaluate_coverage, "Print answer coverage");
    ret_cmd->add_flag("--include-paths", ret.include_paths, "Write the expanded paths");
    add_jobs(ret_cmd, ret.jobs);

    VisualizeCommand vis;
    auto* vis_cmd = app.add_subcommand("visualize", "Render subgraphs as HTML pages");
    add_io(vis_cmd, vis.input, nullptr);
    vis.graph.attach(*vis_cmd);
    vis_cmd->add_option("--output-dir", vis.output_dir, "Directory for the pages")
        ->capture_default_str();
    vis_cmd->add_option("--template", vis.template_path, "Custom HTML template");
    add_jobs(vis_cmd, vis.jobs);

    auto* train_cmd = app.add_subcommand("train", "Scorer training (separate tool)");
    train_cmd->allow_extras();
    train_cmd->prefix_command();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("srtk");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    try {
        if (*train_cmd) {
            err << "srtk: training is provided by the srtk-train tool; "
                   "serve the trained model with srtk-serve and pass --scorer <url>\n";
            return kConfigError;
        }
        if (*link_cmd) return link.execute();
        if (*pre_cmd) return pre.execute();
        if (*ret_cmd) return ret.execute(out);
        if (*vis_cmd) return vis.execute();
    } catch (const ConfigError& e) {
        err << "srtk: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "srtk: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace srtk::cli
