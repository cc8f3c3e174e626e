#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace srtk {

using Json = nlohmann::ordered_json;

using EntityId = std::string;
using RelationId = std::string;
using EntitySet = std::set<EntityId>;
using RelationPath = std::vector<RelationId>;

/// Reserved pseudo-relation label that stops a path.
inline constexpr std::string_view kEndLabel = "END";
/// Separator between the question and the labels of relations already on the path.
inline constexpr std::string_view kSeparator = "[SEP]";

/// Character range [start, end) measured in Unicode scalar values.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    auto operator<=>(const Span&) const = default;
};

struct Triple {
    EntityId subject;
    RelationId predicate;
    EntityId object;

    auto operator<=>(const Triple&) const = default;
};

/// True for non-empty identifiers without whitespace.
bool is_valid_id(std::string_view id);

/// One dataset sample as it flows between pipeline stages. Fields the model does
/// not know about are kept in `extra` and written back unchanged.
struct QuestionRecord {
    std::optional<std::string> id;
    std::optional<std::string> question;
    std::optional<std::vector<EntityId>> question_entities;
    std::optional<std::vector<Span>> spans;
    std::optional<std::vector<std::string>> entity_names;
    std::optional<std::vector<EntityId>> answer_entities;
    Json extra = Json::object();

    /// Throws FormatError naming the offending field.
    static QuestionRecord from_json(const Json& object);
    Json to_json() const;

    /// Checks the span/entity invariants; throws FormatError.
    void validate() const;

    /// The question text, or FormatError when the record has none.
    const std::string& question_text() const;

    bool operator==(const QuestionRecord&) const = default;
};

struct ExpansionPath {
    RelationPath relations;
    bool terminated = false;
    double log_score = 0.0;

    static ExpansionPath from_json(const Json& object);
    Json to_json() const;

    bool operator==(const ExpansionPath&) const = default;
};

/// Deduplicated set of triples that remembers insertion order for output.
class Subgraph {
public:
    Subgraph() = default;
    explicit Subgraph(std::span<const Triple> triples);

    /// Returns false if the triple was already present. Throws FormatError on empty positions.
    bool add(Triple triple);
    bool contains(const Triple& triple) const { return index_.contains(triple); }

    const std::vector<Triple>& triples() const { return triples_; }
    std::size_t size() const { return triples_.size(); }
    bool empty() const { return triples_.empty(); }

    static Subgraph from_json(const Json& triples_array);
    Json to_json() const;

    bool operator==(const Subgraph& other) const { return index_ == other.index_; }

private:
    std::vector<Triple> triples_;
    std::set<Triple> index_;
};

struct TrainSample {
    std::string query;
    std::string positive;
    std::vector<std::string> negatives;

    static TrainSample from_json(const Json& object);
    Json to_json() const;
    void validate() const;

    bool operator==(const TrainSample&) const = default;
};

struct RetrievalResult {
    QuestionRecord record;
    std::optional<std::vector<ExpansionPath>> paths;
    Subgraph subgraph;

    static RetrievalResult from_json(const Json& object);
    Json to_json() const;

    bool operator==(const RetrievalResult&) const = default;
};

/// Splits a stream into JSON objects, one per non-blank line.
class JsonlReader {
public:
    explicit JsonlReader(std::istream& in) : in_(&in) {}

    /// Next object, or nullopt at end of stream. Throws FormatError naming the line.
    std::optional<Json> next();
    /// 1-based number of the line returned by the last successful next().
    std::size_t line_number() const { return line_number_; }

private:
    std::istream* in_;
    std::size_t line_number_ = 0;
};

/// Lazy sequence of typed records read from a JSONL stream.
template <typename Record>
class RecordStream {
public:
    explicit RecordStream(std::istream& in) : reader_(in) {}

    std::optional<Record> next();
    std::size_t line_number() const { return reader_.line_number(); }

    class iterator {
    public:
        using value_type = Record;
        using difference_type = std::ptrdiff_t;
        using iterator_category = std::input_iterator_tag;

        iterator() = default;
        explicit iterator(RecordStream* stream) : stream_(stream) { advance(); }

        const Record& operator*() const { return *current_; }
        const Record* operator->() const { return &*current_; }
        iterator& operator++() {
            advance();
            return *this;
        }
        void operator++(int) { advance(); }
        bool operator==(const iterator& other) const { return stream_ == other.stream_; }

    private:
        void advance() {
            current_ = stream_->next();
            if (!current_) stream_ = nullptr;
        }

        RecordStream* stream_ = nullptr;
        std::optional<Record> current_;
    };

    iterator begin() { return iterator(this); }
    iterator end() { return iterator(); }

private:
    JsonlReader reader_;
};

RecordStream<QuestionRecord> read_records(std::istream& in);

/// Writes one compact JSON object per line and counts bytes.
class JsonlWriter {
public:
    explicit JsonlWriter(std::ostream& out) : out_(&out) {}

    /// Throws FormatError if the object holds text that cannot be encoded as UTF-8.
    std::size_t write(const Json& object);

    template <typename Record>
    std::size_t write_record(const Record& record) {
        return write(record.to_json());
    }

    std::size_t bytes_written() const { return bytes_; }

private:
    std::ostream* out_;
    std::size_t bytes_ = 0;
};

template <typename Record>
std::size_t write_records(std::span<const Record> records, std::ostream& out) {
    JsonlWriter writer(out);
    for (const auto& record : records) writer.write_record(record);
    return writer.bytes_written();
}

// Implementation of the template members.

Json parse_record_line(const std::string& line, std::size_t line_number);
[[noreturn]] void rethrow_with_line(const std::exception& error, std::size_t line_number);

template <typename Record>
std::optional<Record> RecordStream<Record>::next() {
    auto object = reader_.next();
    if (!object) return std::nullopt;
    try {
        return Record::from_json(*object);
    } catch (const std::exception& e) {
        rethrow_with_line(e, reader_.line_number());
    }
}

}  // namespace srtk

namespace srtk {

/// Scorer query for a path prefix: the question, " [SEP]", then each relation label
/// preceded by a space. With no labels the result is "question [SEP]".
std::string compose_query(std::string_view question, std::span<const std::string> labels);

}  // namespace srtk
