#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "srtk/kgsource.hpp"
#include "srtk/memory_source.hpp"

namespace srtk::testkit {

/// Seeded generator with its own bounded draw, so streams match across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
    bool chance(std::uint64_t numerator, std::uint64_t denominator) {
        return below(denominator) < numerator;
    }
    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Profile for fixtures with E*/R* style ids (example.org prefixes, no blocklist).
KnowledgeGraphProfile custom_profile();

/// The five-triple toy graph:
///   E1 -Rloc-> E2, E1 -Rcountry-> E3, E1 -Rtz-> E5, E2 -Rloc-> E4
TripleStoreFixture g0_fixture();

/// Hakata-ku with four outgoing statements (admin entity, country, time zone,
/// different-from). Without the country edge when `with_country` is false.
TripleStoreFixture hakata_fixture(bool with_country = true);

inline constexpr const char* kHakata = "Q1330839";
inline constexpr const char* kFukuoka = "Q26600";
inline constexpr const char* kJapan = "Q17";
inline constexpr const char* kLocatedIn = "P31";
inline constexpr const char* kCountry = "P17";
inline constexpr const char* kTimeZone = "P421";
inline constexpr const char* kDifferentFrom = "P1889";

struct RandomGraphOptions {
    std::size_t nodes = 20;
    std::size_t relations = 6;
    std::size_t edges = 40;
    /// Chance (in percent) that a relation reuses an earlier relation's label.
    std::uint64_t shared_label_percent = 10;
};

/// Random graph over nodes N0.. and relations R0.. with word labels.
TripleStoreFixture random_fixture(std::uint64_t seed, const RandomGraphOptions& options = {});

/// A few words from the same vocabulary the relation labels use.
std::string random_question(Rng& rng);

/// Distinct subjects of a fixture, sorted.
std::vector<std::string> subjects_of(const TripleStoreFixture& fixture);

/// Fresh directory under the system temp dir, removed with its contents on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    /// Writes `content` to a file in the directory and returns its path.
    std::filesystem::path write(const std::string& name, const std::string& content) const;

private:
    std::filesystem::path path_;
};

/// Forwards to another source and counts calls per operation.
class CountingSource final : public KnowledgeSource {
public:
    explicit CountingSource(KnowledgeSource& inner);

    std::set<RelationId> connected_relations(const EntitySet& entities) override;
    EntitySet terminal_entities(const EntitySet& sources,
                                std::span<const RelationId> path) override;
    std::vector<RelationPath> shortest_paths(const EntityId& source, const EntitySet& answers,
                                             int max_hop) override;
    std::vector<std::pair<EntityId, EntityId>> edges(const EntitySet& subjects,
                                                     const RelationId& relation) override;
    std::map<std::string, std::string> fetch_labels(const std::set<std::string>& ids) override;

    std::size_t relation_calls() const { return relation_calls_; }
    std::size_t terminal_calls() const { return terminal_calls_; }
    std::size_t path_calls() const { return path_calls_; }
    std::size_t edge_calls() const { return edge_calls_; }
    std::size_t label_calls() const { return label_calls_; }
    std::size_t total_calls() const {
        return relation_calls_ + terminal_calls_ + path_calls_ + edge_calls_ + label_calls_;
    }

private:
    KnowledgeSource* inner_;
    std::atomic<std::size_t> relation_calls_{0};
    std::atomic<std::size_t> terminal_calls_{0};
    std::atomic<std::size_t> path_calls_{0};
    std::atomic<std::size_t> edge_calls_{0};
    std::atomic<std::size_t> label_calls_{0};
};

}  // namespace srtk::testkit
