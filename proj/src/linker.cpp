#include "srtk/linker.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "srtk/errors.hpp"
#include "srtk/parallel.hpp"
#include "srtk/utf8.hpp"

namespace srtk {

namespace {

const std::regex& qid_pattern() {
    static const std::regex re("Q[0-9]+");
    return re;
}

std::pair<std::string, std::string> split_mapping_line(const std::string& line,
                                                       std::size_t line_number) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
        throw FormatError("mapping line " + std::to_string(line_number) + ": expected title<TAB>QID");
    }
    std::string qid = line.substr(tab + 1);
    if (!qid.empty() && qid.back() == '\r') qid.pop_back();
    if (!std::regex_match(qid, qid_pattern())) {
        throw FormatError("mapping line " + std::to_string(line_number) + ": bad Wikidata id '" +
                          qid + "'");
    }
    return {line.substr(0, tab), std::move(qid)};
}

std::string mapping_key(const std::string& line) {
    return line.substr(0, line.find('\t'));
}

// Scalar-value index of a UTF-16 code-unit offset (Spotlight reports Java string offsets).
std::size_t utf16_to_scalar(std::string_view text, std::size_t utf16_offset) {
    std::size_t units = 0;
    std::size_t scalars = 0;
    std::size_t i = 0;
    while (i < text.size() && units < utf16_offset) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t width = lead < 0x80 ? 1 : (lead >> 5) == 0x6 ? 2 : (lead >> 4) == 0xE ? 3 : 4;
        units += width == 4 ? 2 : 1;
        ++scalars;
        i += width;
    }
    return scalars;
}

double number_field(const nlohmann::json& value, std::string_view what) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        try {
            std::size_t used = 0;
            const double parsed = std::stod(value.get<std::string>(), &used);
            if (used == value.get<std::string>().size()) return parsed;
        } catch (const std::exception&) {
        }
    }
    throw ProtocolError("linker response field " + std::string(what) + " is not numeric");
}

Annotation make_annotation(std::string_view question, std::size_t start, std::size_t end,
                           std::string_view reported_mention) {
    const std::size_t length = utf8::length(question);
    if (start >= end || end > length) {
        throw ProtocolError("linker span [" + std::to_string(start) + ", " + std::to_string(end) +
                            ") outside the question");
    }
    Annotation annotation;
    annotation.span = {start, end};
    // The span is authoritative; the reported mention is only cross-checked.
    annotation.mention = utf8::substr(question, start, end);
    if (utf8::normalize_whitespace(annotation.mention) !=
        utf8::normalize_whitespace(reported_mention)) {
        spdlog::warn("linker mention '{}' does not match question text '{}'", reported_mention,
                     annotation.mention);
    }
    return annotation;
}

}  // namespace

// WikiMapping

WikiMapping::WikiMapping(std::vector<std::pair<std::string, std::string>> entries)
    : entries_(std::move(entries)) {
    for (auto& [title, qid] : entries_) {
        title = wiki_title_key(title);
        if (!std::regex_match(qid, qid_pattern())) throw FormatError("bad Wikidata id '" + qid + "'");
    }
    std::sort(entries_.begin(), entries_.end());
}

WikiMapping WikiMapping::load(const std::filesystem::path& path, std::uintmax_t in_memory_limit) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw ConfigError("cannot open Wikipedia mapping " + path.string());
    if (size > in_memory_limit) {
        WikiMapping mapping;
        mapping.disk_path_ = path;
        mapping.disk_size_ = size;
        spdlog::info("using on-disk lookup for {} ({} bytes)", path.string(), size);
        return mapping;
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open Wikipedia mapping " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        entries.push_back(split_mapping_line(line, line_number));
    }
    return WikiMapping(std::move(entries));
}

std::optional<std::string> WikiMapping::lookup(std::string_view title) const {
    const auto key = wiki_title_key(title);
    if (on_disk()) return lookup_on_disk(key);
    const auto it = std::lower_bound(
        entries_.begin(), entries_.end(), key,
        [](const auto& entry, const std::string& k) { return entry.first < k; });
    if (it == entries_.end() || it->first != key) return std::nullopt;
    return it->second;
}

std::optional<std::string> WikiMapping::lookup_on_disk(std::string_view key) const {
    std::ifstream in(disk_path_, std::ios::binary);
    if (!in) throw ConfigError("cannot open Wikipedia mapping " + disk_path_.string());
    // Narrow [low, high) to a small window whose first line sorts before the key.
    std::uintmax_t low = 0;
    std::uintmax_t high = disk_size_;
    std::string line;
    while (high - low > 4096) {
        const auto mid = low + (high - low) / 2;
        in.clear();
        in.seekg(static_cast<std::streamoff>(mid));
        std::getline(in, line);  // partial line
        const auto line_start = static_cast<std::uintmax_t>(in.tellg());
        if (!std::getline(in, line) || mapping_key(line) >= key) {
            high = mid;
        } else {
            low = line_start;
        }
    }
    in.clear();
    in.seekg(static_cast<std::streamoff>(low));
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const auto current = mapping_key(line);
        if (current == key) return split_mapping_line(line, line_number).second;
        if (current > key) break;
    }
    return std::nullopt;
}

std::string wiki_title_key(std::string_view title) {
    std::string key(utf8::normalize_whitespace(title));
    std::replace(key.begin(), key.end(), ' ', '_');
    return key;
}

// Annotation processing

std::vector<Annotation> resolve_overlaps(std::vector<Annotation> annotations) {
    std::stable_sort(annotations.begin(), annotations.end(),
                     [](const Annotation& a, const Annotation& b) {
                         const double ca = a.confidence.value_or(0.0);
                         const double cb = b.confidence.value_or(0.0);
                         if (ca != cb) return ca > cb;
                         if (a.span.start != b.span.start) return a.span.start < b.span.start;
                         return a.span.end > b.span.end;
                     });
    std::vector<Annotation> kept;
    for (auto& candidate : annotations) {
        const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Annotation& k) {
            return candidate.span.start < k.span.end && k.span.start < candidate.span.end;
        });
        if (!overlaps) kept.push_back(std::move(candidate));
    }
    std::sort(kept.begin(), kept.end(), [](const Annotation& a, const Annotation& b) {
        return a.span < b.span;
    });
    return kept;
}

std::vector<Annotation> parse_rel_response(std::string_view question, std::string_view body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("REL response is not JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ProtocolError("REL response is not a list of rows");
    std::vector<Annotation> annotations;
    for (const auto& row : doc) {
        if (!row.is_array() || row.size() < 5 || !row[0].is_number_unsigned() ||
            !row[1].is_number_unsigned() || !row[2].is_string() || !row[3].is_string()) {
            throw ProtocolError("REL row must be [start, length, mention, title, confidence, ...]");
        }
        const auto start = row[0].get<std::size_t>();
        const auto length = row[1].get<std::size_t>();
        auto annotation =
            make_annotation(question, start, start + length, row[2].get<std::string>());
        annotation.target_name = wiki_title_key(row[3].get<std::string>());
        annotation.target_id = annotation.target_name;
        annotation.confidence = number_field(row[4], "confidence");
        annotations.push_back(std::move(annotation));
    }
    return resolve_overlaps(std::move(annotations));
}

std::vector<Annotation> parse_spotlight_response(std::string_view question, std::string_view body,
                                                 double confidence_threshold,
                                                 const KnowledgeGraphProfile& profile) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("Spotlight response is not JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ProtocolError("Spotlight response is not an object");
    std::vector<Annotation> annotations;
    if (!doc.contains("Resources") || doc["Resources"].is_null()) return annotations;
    const auto& resources = doc["Resources"];
    if (!resources.is_array()) throw ProtocolError("Spotlight Resources is not a list");
    for (const auto& resource : resources) {
        if (!resource.is_object() || !resource.contains("@URI") || !resource["@URI"].is_string() ||
            !resource.contains("@offset") || !resource.contains("@surfaceForm") ||
            !resource["@surfaceForm"].is_string() || !resource.contains("@similarityScore")) {
            throw ProtocolError("Spotlight resource lacks @URI/@offset/@surfaceForm/@similarityScore");
        }
        const double score = number_field(resource["@similarityScore"], "@similarityScore");
        if (score < confidence_threshold) continue;
        const double offset = number_field(resource["@offset"], "@offset");
        if (offset < 0) throw ProtocolError("Spotlight offset is negative");
        const auto surface = resource["@surfaceForm"].get<std::string>();
        const auto start = utf16_to_scalar(question, static_cast<std::size_t>(offset));
        auto annotation = make_annotation(question, start, start + utf8::length(surface), surface);
        annotation.target_id = profile.shorten(resource["@URI"].get<std::string>());
        annotation.target_name = annotation.target_id;
        annotation.confidence = score;
        annotations.push_back(std::move(annotation));
    }
    return resolve_overlaps(std::move(annotations));
}

std::vector<Annotation> annotate_rel(std::string_view question, HttpClient& endpoint,
                                     const std::optional<std::string>& authorization) {
    if (question.empty()) throw std::invalid_argument("question must be non-empty");
    HttpHeaders headers{{"Accept", "application/json"}};
    if (authorization) headers.emplace("Authorization", *authorization);
    const nlohmann::json request = {{"text", question}};
    const auto response = endpoint.post(request.dump(), "application/json", headers);
    return parse_rel_response(question, response.body);
}

std::vector<Annotation> annotate_spotlight(std::string_view question, HttpClient& endpoint,
                                           double confidence_threshold,
                                           const KnowledgeGraphProfile& profile) {
    if (question.empty()) throw std::invalid_argument("question must be non-empty");
    if (confidence_threshold < 0.0 || confidence_threshold > 1.0) {
        throw std::invalid_argument("confidence threshold must lie in [0, 1]");
    }
    const auto response =
        endpoint.get({{"text", std::string(question)},
                      {"confidence", std::to_string(confidence_threshold)}},
                     {{"Accept", "application/json"}});
    return parse_spotlight_response(question, response.body, confidence_threshold, profile);
}

MappedAnnotations map_to_wikidata(std::vector<Annotation> annotations, const WikiMapping& mapping) {
    MappedAnnotations out;
    for (auto& annotation : annotations) {
        auto qid = mapping.lookup(annotation.target_id);
        if (!qid) {
            spdlog::debug("no Wikidata id for '{}'", annotation.target_id);
            ++out.dropped;
            continue;
        }
        annotation.target_id = std::move(*qid);
        out.annotations.push_back(std::move(annotation));
    }
    return out;
}

// Linkers

RelLinker::RelLinker(std::string_view endpoint, std::optional<std::string> authorization,
                     std::shared_ptr<const WikiMapping> mapping, HttpOptions options)
    : client_(endpoint, options),
      authorization_(std::move(authorization)),
      mapping_(std::move(mapping)) {
    if (!mapping_) throw ConfigError("REL linking needs a Wikipedia to Wikidata mapping");
}

std::vector<Annotation> RelLinker::annotate(const std::string& question) {
    auto mapped = map_to_wikidata(annotate_rel(question, client_, authorization_), *mapping_);
    dropped_ += mapped.dropped;
    return std::move(mapped.annotations);
}

SpotlightLinker::SpotlightLinker(std::string_view endpoint, double confidence_threshold,
                                 KnowledgeGraphProfile profile, HttpOptions options)
    : client_(endpoint, options), threshold_(confidence_threshold), profile_(std::move(profile)) {
    if (threshold_ < 0.0 || threshold_ > 1.0) {
        throw ConfigError("confidence threshold must lie in [0, 1]");
    }
}

std::vector<Annotation> SpotlightLinker::annotate(const std::string& question) {
    return annotate_spotlight(question, client_, threshold_, profile_);
}

std::vector<QuestionRecord> link_records(std::vector<QuestionRecord> records, EntityLinker& linker,
                                         std::size_t jobs, LinkStats* stats) {
    std::atomic<std::size_t> failed{0};
    auto linked = parallel_map(records.size(), jobs, [&](std::size_t i) {
        QuestionRecord record = records[i];
        std::vector<Annotation> annotations;
        try {
            const auto& question = record.question_text();
            if (!question.empty()) annotations = linker.annotate(question);
            record.extra.erase("error");
        } catch (const std::exception& e) {
            spdlog::error("record {}: linking failed: {}", i, e.what());
            record.extra["error"] = e.what();
            ++failed;
        }
        record.question_entities.emplace();
        record.spans.emplace();
        record.entity_names.emplace();
        for (const auto& a : annotations) {
            record.question_entities->push_back(a.target_id);
            record.spans->push_back(a.span);
            record.entity_names->push_back(a.target_name);
        }
        return record;
    });
    if (stats) {
        stats->records = linked.size();
        stats->failed = failed;
    }
    return linked;
}

}  // namespace srtk
