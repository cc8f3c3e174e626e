#include "srtk/evaluator.hpp"

#include <optional>

#include <spdlog/spdlog.h>

#include "srtk/errors.hpp"
#include "srtk/parallel.hpp"

namespace srtk {

bool is_covered(const Subgraph& subgraph, const EntitySet& answers) {
    for (const auto& t : subgraph.triples()) {
        if (answers.contains(t.subject) || answers.contains(t.object)) return true;
    }
    return false;
}

double EvalReport::coverage_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
}

double EvalReport::avg_triples() const {
    return total == 0 ? 0.0 : static_cast<double>(triple_count) / static_cast<double>(total);
}

void EvalReport::add(const Subgraph& subgraph, const EntitySet& answers) {
    ++total;
    triple_count += subgraph.size();
    if (is_covered(subgraph, answers)) ++covered;
}

void EvalReport::add_failure() {
    ++total;
    ++failed;
}

std::string format_ratio(std::uint64_t numerator, std::uint64_t denominator, int places) {
    if (denominator == 0) return "nan";
    std::uint64_t scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    // round(n * scale / d) with halves rounded up
    const std::uint64_t scaled = (2 * numerator * scale + denominator) / (2 * denominator);
    if (places <= 0) return std::to_string(scaled);
    std::string digits = std::to_string(scaled % scale);
    digits.insert(0, static_cast<std::size_t>(places) - digits.size(), '0');
    return std::to_string(scaled / scale) + "." + digits;
}

std::string EvalReport::format() const {
    return "Answer coverage rate: " + format_ratio(covered, total) + " (" +
           std::to_string(covered) + " / " + std::to_string(total) + ")\n" +
           "Average subgraph size: " + format_ratio(triple_count, total) + " triples\n";
}

EvalReport evaluate(std::span<const QuestionRecord> records, const RetrieveFn& retrieve,
                    std::size_t jobs) {
    auto outcomes = parallel_map(records.size(), jobs, [&](std::size_t i)
                                     -> std::optional<RetrievalResult> {
        try {
            return retrieve(records[i]);
        } catch (const Error& e) {
            spdlog::error("record {}: retrieval failed: {}", i, e.what());
            return std::nullopt;
        }
    });
    EvalReport report;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& answers = records[i].answer_entities;
        if (!outcomes[i]) {
            report.add_failure();
            continue;
        }
        report.add(outcomes[i]->subgraph,
                   answers ? EntitySet(answers->begin(), answers->end()) : EntitySet{});
    }
    return report;
}

}  // namespace srtk
