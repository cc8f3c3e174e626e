#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "srtk/kgdata.hpp"

namespace srtk {

/// True iff some answer occurs as subject or object of a triple.
bool is_covered(const Subgraph& subgraph, const EntitySet& answers);

struct EvalReport {
    std::size_t covered = 0;
    std::size_t total = 0;
    std::size_t failed = 0;         // retrieval errors; counted as uncovered, 0 triples
    std::uint64_t triple_count = 0;  // summed over all records

    double coverage_rate() const;
    double avg_triples() const;

    /// "Answer coverage rate: r (covered / total)\nAverage subgraph size: a triples\n",
    /// both reals rounded half-up to four decimals.
    std::string format() const;

    void add(const Subgraph& subgraph, const EntitySet& answers);
    void add_failure();
};

/// Decimal rendering of numerator/denominator rounded half-up to `places` digits,
/// computed in integers so no binary rounding leaks in.
std::string format_ratio(std::uint64_t numerator, std::uint64_t denominator, int places = 4);

using RetrieveFn = std::function<RetrievalResult(const QuestionRecord&)>;

/// Runs `retrieve` on every record (up to `jobs` at a time) and aggregates coverage.
EvalReport evaluate(std::span<const QuestionRecord> records, const RetrieveFn& retrieve,
                    std::size_t jobs = 1);

}  // namespace srtk
