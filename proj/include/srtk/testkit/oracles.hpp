#pragma once

#include <memory>
#include <string>
#include <vector>

#include "srtk/kgdata.hpp"
#include "srtk/memory_source.hpp"
#include "srtk/scorer.hpp"
#include "srtk/testkit/planted.hpp"

namespace srtk::testkit {

/// 1.0 for the next gold relation label (END once the gold path is used up) when
/// the query is a gold prefix of some planted question, 0.0 for everything else.
std::unique_ptr<Scorer> oracle_scorer(const PlantedInstance& instance);

/// Every relation sequence of length <= max_depth from `entities`, scored with the
/// same softmax chain as the beam search, ranked best first. Walks the fixture
/// directly; labels fall back to the id.
std::vector<ExpansionPath> brute_force_paths(const TripleStoreFixture& graph,
                                             const EntitySet& entities,
                                             const std::string& question, Scorer& scorer,
                                             std::size_t max_depth, double temperature = 1.0);

/// Every construct in `html` that could load something from outside the page:
/// src/href attributes, CSS url()/@import, link/iframe/object/embed tags and
/// script-side network calls. Empty means the page is self-contained.
std::vector<std::string> external_references(const std::string& html);

}  // namespace srtk::testkit
