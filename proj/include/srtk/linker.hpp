#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srtk/http.hpp"
#include "srtk/kgdata.hpp"
#include "srtk/kgsource.hpp"

namespace srtk {

struct Annotation {
    Span span;
    std::string mention;
    std::string target_id;
    std::string target_name;
    std::optional<double> confidence;

    bool operator==(const Annotation&) const = default;
};

/// Wikipedia title (underscored) to Wikidata item id, read from a sorted
/// `title<TAB>QID` file. Small tables are loaded into memory; large ones are
/// binary-searched on disk.
class WikiMapping {
public:
    static constexpr std::uintmax_t kInMemoryLimit = 256u << 20;

    WikiMapping() = default;
    explicit WikiMapping(std::vector<std::pair<std::string, std::string>> entries);

    /// Throws ConfigError if the file is missing and FormatError on bad lines/ids.
    static WikiMapping load(const std::filesystem::path& path,
                            std::uintmax_t in_memory_limit = kInMemoryLimit);

    std::optional<std::string> lookup(std::string_view title) const;
    bool on_disk() const { return !disk_path_.empty(); }

private:
    std::optional<std::string> lookup_on_disk(std::string_view title) const;

    std::vector<std::pair<std::string, std::string>> entries_;
    std::filesystem::path disk_path_;
    std::uintmax_t disk_size_ = 0;
};

/// Normalizes a Wikipedia title to the underscored form used as mapping key.
std::string wiki_title_key(std::string_view title);

/// Keeps the highest-confidence annotation among overlapping spans; result sorted by start.
std::vector<Annotation> resolve_overlaps(std::vector<Annotation> annotations);

/// Parses a REL response (`[[start, length, mention, title, confidence, ...], ...]`).
std::vector<Annotation> parse_rel_response(std::string_view question, std::string_view body);

/// Parses a Spotlight response (`{"Resources": [{"@URI", "@offset", ...}]}`).
std::vector<Annotation> parse_spotlight_response(std::string_view question, std::string_view body,
                                                 double confidence_threshold,
                                                 const KnowledgeGraphProfile& profile);

/// Links mentions to Wikipedia titles through a REL-style service.
std::vector<Annotation> annotate_rel(std::string_view question, HttpClient& endpoint,
                                     const std::optional<std::string>& authorization);

/// Links mentions to DBpedia resources through a Spotlight-style service.
std::vector<Annotation> annotate_spotlight(std::string_view question, HttpClient& endpoint,
                                           double confidence_threshold,
                                           const KnowledgeGraphProfile& profile);

struct MappedAnnotations {
    std::vector<Annotation> annotations;
    std::size_t dropped = 0;
};

/// Rewrites Wikipedia targets to Wikidata ids; unmapped annotations are dropped and counted.
MappedAnnotations map_to_wikidata(std::vector<Annotation> annotations, const WikiMapping& mapping);

class EntityLinker {
public:
    virtual ~EntityLinker() = default;
    virtual std::vector<Annotation> annotate(const std::string& question) = 0;
};

/// REL annotation followed by the Wikipedia to Wikidata mapping step.
class RelLinker final : public EntityLinker {
public:
    RelLinker(std::string_view endpoint, std::optional<std::string> authorization,
              std::shared_ptr<const WikiMapping> mapping, HttpOptions options = {});

    std::vector<Annotation> annotate(const std::string& question) override;
    std::size_t dropped() const { return dropped_; }

private:
    HttpClient client_;
    std::optional<std::string> authorization_;
    std::shared_ptr<const WikiMapping> mapping_;
    std::atomic<std::size_t> dropped_{0};
};

class SpotlightLinker final : public EntityLinker {
public:
    static constexpr double kDefaultConfidence = 0.5;

    SpotlightLinker(std::string_view endpoint, double confidence_threshold,
                    KnowledgeGraphProfile profile, HttpOptions options = {});

    std::vector<Annotation> annotate(const std::string& question) override;

private:
    HttpClient client_;
    double threshold_;
    KnowledgeGraphProfile profile_;
};

struct LinkStats {
    std::size_t records = 0;
    std::size_t failed = 0;
};

/// Fills question_entities/spans/entity_names on every record (in input order).
/// A record whose linking fails gets empty arrays and an `error` field.
std::vector<QuestionRecord> link_records(std::vector<QuestionRecord> records, EntityLinker& linker,
                                         std::size_t jobs = 4, LinkStats* stats = nullptr);

}  // namespace srtk
