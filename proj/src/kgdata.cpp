#include "srtk/kgdata.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include "srtk/errors.hpp"
#include "srtk/utf8.hpp"

namespace srtk {

namespace {

constexpr std::string_view kKnownRecordFields[] = {
    "id", "question", "question_entities", "spans", "entity_names", "answer_entities"};

bool is_absent(const Json& object, std::string_view key) {
    const auto it = object.find(key);
    return it == object.end() || it->is_null();
}

[[noreturn]] void field_error(std::string_view field, std::string_view what) {
    throw FormatError("field '" + std::string(field) + "': " + std::string(what));
}

std::optional<std::string> optional_string(const Json& object, std::string_view key) {
    if (is_absent(object, key)) return std::nullopt;
    const auto& value = object.at(key);
    if (!value.is_string()) field_error(key, "expected a string");
    return value.get<std::string>();
}

std::string required_string(const Json& object, std::string_view key) {
    auto value = optional_string(object, key);
    if (!value) field_error(key, "missing");
    return *value;
}

std::vector<std::string> string_list(const Json& value, std::string_view key) {
    if (!value.is_array()) field_error(key, "expected a list of strings");
    std::vector<std::string> out;
    out.reserve(value.size());
    for (const auto& item : value) {
        if (!item.is_string()) field_error(key, "expected a list of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::optional<std::vector<std::string>> optional_string_list(const Json& object,
                                                             std::string_view key) {
    if (is_absent(object, key)) return std::nullopt;
    return string_list(object.at(key), key);
}

std::optional<std::vector<Span>> optional_spans(const Json& object) {
    if (is_absent(object, "spans")) return std::nullopt;
    const auto& value = object.at("spans");
    if (!value.is_array()) field_error("spans", "expected a list of [start, end] pairs");
    std::vector<Span> spans;
    for (const auto& pair : value) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() ||
            !pair[1].is_number_unsigned()) {
            field_error("spans", "expected a list of [start, end] pairs");
        }
        spans.push_back({pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
    }
    return spans;
}

void check_ids(const std::vector<EntityId>& ids, std::string_view field) {
    for (const auto& id : ids) {
        if (!is_valid_id(id)) field_error(field, "invalid identifier '" + id + "'");
    }
}

}  // namespace

bool is_valid_id(std::string_view id) {
    return !id.empty() && std::none_of(id.begin(), id.end(), [](char c) {
        return std::isspace(static_cast<unsigned char>(c));
    });
}

// QuestionRecord

QuestionRecord QuestionRecord::from_json(const Json& object) {
    if (!object.is_object()) throw FormatError("record is not a JSON object");
    QuestionRecord record;
    record.id = optional_string(object, "id");
    record.question = optional_string(object, "question");
    record.question_entities = optional_string_list(object, "question_entities");
    record.spans = optional_spans(object);
    record.entity_names = optional_string_list(object, "entity_names");
    record.answer_entities = optional_string_list(object, "answer_entities");
    for (const auto& [key, value] : object.items()) {
        if (std::find(std::begin(kKnownRecordFields), std::end(kKnownRecordFields), key) ==
            std::end(kKnownRecordFields)) {
            record.extra[key] = value;
        }
    }
    record.validate();
    return record;
}

Json QuestionRecord::to_json() const {
    Json out = Json::object();
    if (id) out["id"] = *id;
    if (question) out["question"] = *question;
    if (question_entities) out["question_entities"] = *question_entities;
    if (spans) {
        Json array = Json::array();
        for (const auto& span : *spans) array.push_back(Json::array({span.start, span.end}));
        out["spans"] = std::move(array);
    }
    if (entity_names) out["entity_names"] = *entity_names;
    if (answer_entities) out["answer_entities"] = *answer_entities;
    for (const auto& [key, value] : extra.items()) out[key] = value;
    return out;
}

void QuestionRecord::validate() const {
    if (question && !utf8::is_valid(*question)) field_error("question", "invalid UTF-8");
    if (question_entities) check_ids(*question_entities, "question_entities");
    if (answer_entities) check_ids(*answer_entities, "answer_entities");
    if (!spans) return;
    if (!question_entities || spans->size() != question_entities->size()) {
        field_error("spans", "must have one span per question entity");
    }
    const std::size_t limit = question ? utf8::length(*question) : SIZE_MAX;
    for (const auto& span : *spans) {
        if (span.start >= span.end || span.end > limit) {
            field_error("spans", "span [" + std::to_string(span.start) + ", " +
                                     std::to_string(span.end) + ") out of range");
        }
    }
}

const std::string& QuestionRecord::question_text() const {
    if (!question) field_error("question", "missing");
    return *question;
}

// ExpansionPath

ExpansionPath ExpansionPath::from_json(const Json& object) {
    if (!object.is_object() || !object.contains("relations")) {
        field_error("paths", "expected objects with 'relations'");
    }
    ExpansionPath path;
    path.relations = string_list(object.at("relations"), "paths");
    if (object.contains("log_score")) {
        if (!object.at("log_score").is_number()) field_error("paths", "log_score must be a number");
        path.log_score = object.at("log_score").get<double>();
    }
    if (object.contains("terminated")) {
        if (!object.at("terminated").is_boolean()) {
            field_error("paths", "terminated must be a boolean");
        }
        path.terminated = object.at("terminated").get<bool>();
    }
    return path;
}

Json ExpansionPath::to_json() const {
    return Json{{"relations", relations}, {"log_score", log_score}, {"terminated", terminated}};
}

// Subgraph

Subgraph::Subgraph(std::span<const Triple> triples) {
    for (const auto& triple : triples) add(triple);
}

bool Subgraph::add(Triple triple) {
    if (triple.subject.empty() || triple.predicate.empty() || triple.object.empty()) {
        throw FormatError("triple with an empty position");
    }
    if (!index_.insert(triple).second) return false;
    triples_.push_back(std::move(triple));
    return true;
}

Subgraph Subgraph::from_json(const Json& triples_array) {
    if (!triples_array.is_array()) field_error("triples", "expected a list of triples");
    Subgraph subgraph;
    for (const auto& item : triples_array) {
        if (!item.is_array() || item.size() != 3 ||
            !std::all_of(item.begin(), item.end(), [](const Json& v) { return v.is_string(); })) {
            field_error("triples", "expected [subject, predicate, object] string triples");
        }
        subgraph.add({item[0].get<std::string>(), item[1].get<std::string>(),
                      item[2].get<std::string>()});
    }
    return subgraph;
}

Json Subgraph::to_json() const {
    Json array = Json::array();
    for (const auto& t : triples_) array.push_back(Json::array({t.subject, t.predicate, t.object}));
    return array;
}

// TrainSample

TrainSample TrainSample::from_json(const Json& object) {
    if (!object.is_object()) throw FormatError("record is not a JSON object");
    TrainSample sample;
    sample.query = required_string(object, "query");
    sample.positive = required_string(object, "positive");
    if (!is_absent(object, "negatives")) {
        sample.negatives = string_list(object.at("negatives"), "negatives");
    }
    sample.validate();
    return sample;
}

Json TrainSample::to_json() const {
    return Json{{"query", query}, {"positive", positive}, {"negatives", negatives}};
}

void TrainSample::validate() const {
    if (std::find(negatives.begin(), negatives.end(), positive) != negatives.end()) {
        field_error("negatives", "contains the positive relation");
    }
    std::set<std::string> seen;
    for (const auto& negative : negatives) {
        if (!seen.insert(negative).second) field_error("negatives", "duplicate '" + negative + "'");
    }
}

// RetrievalResult

RetrievalResult RetrievalResult::from_json(const Json& object) {
    RetrievalResult result;
    result.record = QuestionRecord::from_json(object);
    auto& extra = result.record.extra;
    if (extra.contains("triples")) {
        result.subgraph = Subgraph::from_json(extra.at("triples"));
        extra.erase("triples");
    }
    // `paths` may also hold gold relation lists (plain arrays); those stay in extra.
    if (extra.contains("paths") && extra.at("paths").is_array() &&
        std::all_of(extra.at("paths").begin(), extra.at("paths").end(),
                    [](const Json& p) { return p.is_object(); })) {
        std::vector<ExpansionPath> paths;
        for (const auto& item : extra.at("paths")) paths.push_back(ExpansionPath::from_json(item));
        result.paths = std::move(paths);
        extra.erase("paths");
    }
    return result;
}

Json RetrievalResult::to_json() const {
    Json out = record.to_json();
    out["triples"] = subgraph.to_json();
    if (paths) {
        Json array = Json::array();
        for (const auto& path : *paths) array.push_back(path.to_json());
        out["paths"] = std::move(array);
    }
    return out;
}

// Streams

Json parse_record_line(const std::string& line, std::size_t line_number) {
    try {
        return Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw FormatError("line " + std::to_string(line_number) + ": malformed JSON: " + e.what());
    }
}

void rethrow_with_line(const std::exception& error, std::size_t line_number) {
    throw FormatError("line " + std::to_string(line_number) + ": " + error.what());
}

std::optional<Json> JsonlReader::next() {
    std::string line;
    while (std::getline(*in_, line)) {
        ++line_number_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (std::all_of(line.begin(), line.end(),
                        [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
            continue;
        }
        return parse_record_line(line, line_number_);
    }
    return std::nullopt;
}

RecordStream<QuestionRecord> read_records(std::istream& in) {
    return RecordStream<QuestionRecord>(in);
}

std::size_t JsonlWriter::write(const Json& object) {
    std::string line;
    try {
        line = object.dump();
    } catch (const Json::type_error& e) {
        throw FormatError(std::string("cannot encode record: ") + e.what());
    }
    line.push_back('\n');
    out_->write(line.data(), static_cast<std::streamsize>(line.size()));
    bytes_ += line.size();
    return line.size();
}

}  // namespace srtk

namespace srtk {

std::string compose_query(std::string_view question, std::span<const std::string> labels) {
    std::string query(question);
    query += ' ';
    query += kSeparator;
    for (const auto& label : labels) {
        query += ' ';
        query += label;
    }
    return query;
}

}  // namespace srtk
