#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srtk/http.hpp"
#include "srtk/kgsource.hpp"
#include "srtk/scorer.hpp"

namespace srtk::cli {

enum ExitCode : int { kSuccess = 0, kRecordErrors = 1, kConfigError = 2 };

/// Resolves `--knowledge-graph`: a built-in name, or a JSON file whose fields
/// override a built-in profile (`name`, default "custom") one by one. An explicit
/// `endpoint_override` wins over both. Throws ConfigError for unknown names, bad
/// files, and (when `require_endpoint`) profiles without a SPARQL endpoint.
KnowledgeGraphProfile resolve_profile(std::string_view name_or_path,
                                      const std::optional<std::string>& endpoint_override = {},
                                      bool require_endpoint = true);

/// In-memory backend when `kg_file` is set, SPARQL otherwise.
std::unique_ptr<KnowledgeSource> make_source(const KnowledgeGraphProfile& profile,
                                             const std::optional<std::string>& kg_file);

/// `lexical` or an http(s) URL of an embedding endpoint. Throws ConfigError for
/// anything else (model hub ids included).
std::unique_ptr<Scorer> make_scorer(std::string_view spec, HttpOptions options = {});

/// Entry point shared by the executable and the tests. Results go to `out`
/// (only `retrieve --evaluate` prints there), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace srtk::cli
