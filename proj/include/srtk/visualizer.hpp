#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "srtk/kgdata.hpp"

namespace srtk {

struct GraphNode {
    std::string id;
    std::string label;
    bool highlighted = false;

    bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
    std::string source;
    std::string target;
    std::string label;

    bool operator==(const GraphEdge&) const = default;
};

struct GraphDocument {
    std::string title;
    std::vector<GraphNode> nodes;  // first-appearance order
    std::vector<GraphEdge> edges;  // one per triple

    Json to_json() const;
};

/// One node per distinct subject/object, one edge per triple; question entities
/// are highlighted. Missing labels fall back to the identifier.
GraphDocument build_graph_document(const RetrievalResult& result,
                                   const std::map<std::string, std::string>& labels);

/// Built-in page: inline styles and an inline canvas renderer with pan, zoom and drag.
std::string_view default_html_template();
/// The renderer script inlined by the default template.
std::string_view graph_view_script();

/// Fills `{{GRAPH_DATA}}`, `{{GRAPH_SCRIPT}}` and (optionally) `{{TITLE}}`.
/// Throws ConfigError if either required placeholder is missing.
std::string render_html(const GraphDocument& doc,
                        std::string_view html_template = default_html_template());

/// File stem for a record's page: its id when present, else the line index.
std::string page_name(const QuestionRecord& record, std::size_t line_index);

}  // namespace srtk
