#include "ponzilens/error.hpp"
#include "ponzilens/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ponzilens {

namespace {

using nlohmann::json;

bool is_source_unit_node(const json& node)
{
    return node.is_object() && node.value("nodeType", "") == "SourceUnit" && node.contains("nodes") &&
           node["nodes"].is_array();
}

std::optional<std::string> pragma_from_ast(const json& ast)
{
    for (const auto& node : ast["nodes"]) {
        if (node.value("nodeType", "") != "PragmaDirective" || !node.contains("literals"))
            continue;
        const auto& lits = node["literals"];
        if (lits.empty() || lits[0] != "solidity")
            continue;
        std::string out;
        for (std::size_t i = 1; i < lits.size(); ++i) {
            std::string lit = lits[i].get<std::string>();
            // Literals split `>=0.4.22 <0.6.0` into tokens; re-insert the space
            // between a version and a following operator.
            bool is_op = lit.find_first_not_of("<>=^~|") == std::string::npos;
            if (!out.empty() && is_op && std::isdigit(static_cast<unsigned char>(out.back())))
                out += ' ';
            out += lit;
        }
        return out;
    }
    return std::nullopt;
}

void apply_pragma(SourceUnit& unit, std::optional<std::string> pragma)
{
    unit.pragma = std::move(pragma);
    unit.unsupported = false;
    if (!unit.pragma)
        return;
    try {
        unit.unsupported = !VersionConstraint::parse(*unit.pragma).lowest_supported().has_value();
    } catch (const Error&) {
        unit.unsupported = true;
    }
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const std::string& SourceUnit::source_text() const
{
    static const std::string empty;
    return files.empty() ? empty : files.front().text;
}

const std::string* SourceUnit::file_text(int file_index) const
{
    if (file_index < 0 || static_cast<std::size_t>(file_index) >= files.size())
        return nullptr;
    const auto& text = files[static_cast<std::size_t>(file_index)].text;
    return text.empty() ? nullptr : &text;
}

std::optional<Version> SourceUnit::pragma_version() const
{
    if (!pragma)
        return std::nullopt;
    try {
        return VersionConstraint::parse(*pragma).lowest_supported();
    } catch (const Error&) {
        return std::nullopt;
    }
}

SourceUnit make_source_unit(std::string id, std::string path_or_address, std::string file_name, std::string text)
{
    SourceUnit unit;
    unit.id = std::move(id);
    unit.path_or_address = std::move(path_or_address);
    apply_pragma(unit, find_pragma(text));
    unit.files.push_back({std::move(file_name), std::move(text)});
    return unit;
}

SourceUnit load_ast(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::JsonError, std::string("AST document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw Error(ErrorCode::MalformedAst, "AST document must be a JSON object");

    SourceUnit unit;
    json sources = json::object();

    if (is_source_unit_node(doc)) {
        std::string name = doc.value("absolutePath", "<stdin>");
        sources[name] = json{{"id", 0}, {"ast", doc}};
    } else if (doc.contains("sources") && doc["sources"].is_object() && !doc["sources"].empty()) {
        for (const auto& [name, entry] : doc["sources"].items()) {
            if (!entry.is_object() || !entry.contains("ast") || !is_source_unit_node(entry["ast"])) {
                std::string hint = entry.is_object() && entry.contains("legacyAST")
                                       ? " (legacy AST format is not supported)"
                                       : "";
                throw Error(ErrorCode::MalformedAst, "source '" + name + "' has no compact SourceUnit AST" + hint);
            }
            sources[name] = entry;
        }
    } else {
        throw Error(ErrorCode::MalformedAst, "document has neither a 'sources' map nor a SourceUnit root");
    }

    // Order files by compiler source id; entries without ids keep document order.
    std::vector<std::pair<int, std::string>> order;
    int next_free = 0;
    for (const auto& [name, entry] : sources.items()) {
        int id = entry.contains("id") && entry["id"].is_number_integer() ? entry["id"].get<int>() : -1;
        order.emplace_back(id, name);
        next_free = std::max(next_free, id + 1);
    }
    for (auto& [id, name] : order)
        if (id < 0)
            id = next_free++;
    std::sort(order.begin(), order.end());

    json normalised = json::object();
    unit.files.resize(order.empty() ? 0 : static_cast<std::size_t>(order.back().first) + 1);
    for (const auto& [id, name] : order) {
        const json& entry = sources[name];
        unit.files[static_cast<std::size_t>(id)].name = name;
        if (entry.contains("content") && entry["content"].is_string())
            unit.files[static_cast<std::size_t>(id)].text = entry["content"].get<std::string>();
        normalised[name] = json{{"id", id}, {"ast", entry["ast"]}};
    }
    unit.ast_json = json{{"sources", normalised}};

    std::optional<std::string> pragma;
    if (!unit.source_text().empty())
        pragma = find_pragma(unit.source_text());
    for (const auto& [id, name] : order) {
        if (pragma)
            break;
        pragma = pragma_from_ast(sources[name]["ast"]);
    }
    apply_pragma(unit, pragma);

    unit.compiler_version = doc.value("compiler_version", "");
    unit.id = doc.value("id", order.empty() ? std::string() : order.front().second);
    unit.path_or_address = unit.id;
    return unit;
}

nlohmann::json to_ast_document(const SourceUnit& unit)
{
    if (!unit.ast_json)
        throw Error(ErrorCode::MalformedAst, "unit '" + unit.id + "' has no AST");
    json doc = *unit.ast_json;
    for (auto& [name, entry] : doc["sources"].items()) {
        int id = entry.value("id", -1);
        if (id >= 0 && static_cast<std::size_t>(id) < unit.files.size() && !unit.files[static_cast<std::size_t>(id)].text.empty())
            entry["content"] = unit.files[static_cast<std::size_t>(id)].text;
    }
    if (!unit.compiler_version.empty())
        doc["compiler_version"] = unit.compiler_version;
    return doc;
}

SourceUnit read_source_path(const std::filesystem::path& path, const CompilerSelector* selector)
{
    std::string name = path.filename().string();
    auto ends_with = [&](std::string_view suffix) {
        return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    std::string text = read_file(path);

    if (ends_with(".json")) {
        SourceUnit unit = load_ast(text);
        std::string stem = name.substr(0, name.size() - (ends_with(".ast.json") ? 9 : 5));
        if (unit.source_text().empty()) {
            auto sibling = path.parent_path() / (stem + ".sol");
            if (std::filesystem::exists(sibling) && !unit.files.empty()) {
                unit.files.front().text = read_file(sibling);
                if (!unit.pragma)
                    apply_pragma(unit, find_pragma(unit.files.front().text));
            }
        }
        unit.id = stem;
        unit.path_or_address = path.string();
        return unit;
    }

    std::string stem = path.stem().string();
    SourceUnit unit = make_source_unit(stem, path.string(), name, std::move(text));
    if (selector == nullptr)
        throw Error(ErrorCode::CompilerNotFound, "no compiler configured for " + path.string());
    return compile_source(std::move(unit), *selector);
}

}  // namespace ponzilens
