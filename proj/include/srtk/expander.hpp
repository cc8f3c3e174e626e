#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "srtk/kgdata.hpp"
#include "srtk/kgsource.hpp"
#include "srtk/scorer.hpp"

namespace srtk {

struct BeamEntry {
    ExpansionPath path;
    EntitySet frontier;  // entities tracked at the end of the path
};

/// Beam entries ordered best first (see path_precedes).
using Beam = std::vector<BeamEntry>;

inline constexpr std::size_t kUnboundedBeam = std::numeric_limits<std::size_t>::max();

struct ExpansionOptions {
    std::size_t beam_width = 1;
    std::size_t max_depth = 1;
    double temperature = 1.0;
    /// Frontiers above this size are truncated (sorted order) with a warning.
    std::size_t frontier_cap = 10'000;
};

/// Beam order: higher log_score first; equal scores fall back to the
/// lexicographically smaller relation sequence, then terminated before open.
bool path_precedes(const ExpansionPath& a, const ExpansionPath& b);

/// Extends every open path by one relation or END and keeps the best
/// `options.beam_width` of the children plus the already terminated paths.
Beam expand_step(const Beam& beam, const std::string& question, Scorer& scorer,
                 KnowledgeSource& source, LabelCache& labels, const ExpansionOptions& options);

/// Beam search from a single empty path whose frontier is `entities`. Stops after
/// max_depth steps or once every path is terminated. Sorted best first.
std::vector<ExpansionPath> retrieve_paths(const std::string& question, const EntitySet& entities,
                                          Scorer& scorer, KnowledgeSource& source,
                                          LabelCache& labels, const ExpansionOptions& options);

/// Union of the triples instantiated along each path starting from `entities`.
Subgraph materialize_subgraph(const EntitySet& entities, const std::vector<ExpansionPath>& paths,
                              KnowledgeSource& source);

/// Linked record in, retrieved subgraph out. Shareable across threads as long as
/// the scorer and source are.
class Retriever {
public:
    Retriever(KnowledgeSource& source, Scorer& scorer, ExpansionOptions options);

    RetrievalResult retrieve(const QuestionRecord& record);

    const ExpansionOptions& options() const { return options_; }

private:
    KnowledgeSource* source_;
    Scorer* scorer_;
    LabelCache labels_;
    ExpansionOptions options_;
};

}  // namespace srtk
