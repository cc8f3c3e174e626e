#include "srtk/visualizer.hpp"

#include <cctype>
#include <set>

#include "srtk/errors.hpp"

namespace srtk {

namespace {

constexpr std::string_view kDataSlot = "{{GRAPH_DATA}}";
constexpr std::string_view kScriptSlot = "{{GRAPH_SCRIPT}}";
constexpr std::string_view kTitleSlot = "{{TITLE}}";

std::string label_of(const std::map<std::string, std::string>& labels, const std::string& id) {
    const auto it = labels.find(id);
    return it != labels.end() ? it->second : id;
}

// JSON that is safe inside a <script> element.
std::string script_safe_json(const Json& value) {
    const std::string raw = value.dump();
    std::string out;
    out.reserve(raw.size());
    for (const char c : raw) {
        switch (c) {
            case '<': out += "\\u003c"; break;
            case '>': out += "\\u003e"; break;
            case '&': out += "\\u0026"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string html_escape(std::string_view text) {
    std::string out;
    for (const char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    for (auto pos = text.find(slot); pos != std::string::npos;
         pos = text.find(slot, pos + value.size())) {
        text.replace(pos, slot.size(), value);
    }
}

}  // namespace

Json GraphDocument::to_json() const {
    Json nodes_json = Json::array();
    for (const auto& n : nodes) {
        nodes_json.push_back({{"id", n.id}, {"label", n.label}, {"highlighted", n.highlighted}});
    }
    Json edges_json = Json::array();
    for (const auto& e : edges) {
        edges_json.push_back({{"source", e.source}, {"target", e.target}, {"label", e.label}});
    }
    return Json{{"title", title}, {"nodes", nodes_json}, {"edges", edges_json}};
}

GraphDocument build_graph_document(const RetrievalResult& result,
                                   const std::map<std::string, std::string>& labels) {
    GraphDocument doc;
    doc.title = result.record.question.value_or("");
    std::set<std::string> linked;
    if (result.record.question_entities) {
        linked.insert(result.record.question_entities->begin(),
                      result.record.question_entities->end());
    }
    std::set<std::string> seen;
    auto add_node = [&](const std::string& id) {
        if (seen.insert(id).second) {
            doc.nodes.push_back({id, label_of(labels, id), linked.contains(id)});
        }
    };
    for (const auto& t : result.subgraph.triples()) {
        add_node(t.subject);
        add_node(t.object);
        doc.edges.push_back({t.subject, t.object, label_of(labels, t.predicate)});
    }
    return doc;
}

std::string render_html(const GraphDocument& doc, std::string_view html_template) {
    if (html_template.find(kDataSlot) == std::string_view::npos ||
        html_template.find(kScriptSlot) == std::string_view::npos) {
        throw ConfigError("HTML template must contain {{GRAPH_DATA}} and {{GRAPH_SCRIPT}}");
    }
    std::string page(html_template);
    // The script goes in last so its text is never searched for placeholders.
    replace_all(page, kTitleSlot, html_escape(doc.title));
    replace_all(page, kDataSlot, script_safe_json(doc.to_json()));
    replace_all(page, kScriptSlot, graph_view_script());
    return page;
}

std::string page_name(const QuestionRecord& record, std::size_t line_index) {
    if (!record.id || record.id->empty()) return std::to_string(line_index);
    std::string name;
    for (const char c : *record.id) {
        const auto u = static_cast<unsigned char>(c);
        name.push_back(std::isalnum(u) || c == '-' || c == '_' || c == '.' ? c : '_');
    }
    if (name.front() == '.') name.front() = '_';
    return name;
}

}  // namespace srtk
