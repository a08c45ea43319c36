#include "ponzilens/error.hpp"
#include "ponzilens/ingest.hpp"

#include "subprocess.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <sstream>
#include <system_error>

namespace ponzilens {

namespace {

using nlohmann::json;

std::optional<Version> query_version(const std::filesystem::path& exe)
{
    try {
        auto result = detail::run_process({exe.string(), "--version"}, "");
        static const std::regex re(R"((\d+)\.(\d+)\.(\d+))");
        std::smatch m;
        std::string text = result.out + result.err;
        if (result.exit_code == 0 && std::regex_search(text, m, re))
            return Version{std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3])};
    } catch (const std::system_error&) {
    }
    return std::nullopt;
}

std::vector<std::string> split_path_list(const char* value)
{
    std::vector<std::string> out;
    if (value == nullptr)
        return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ':'))
        if (!item.empty())
            out.push_back(item);
    return out;
}

bool is_blank(std::string_view text)
{
    return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

void CompilerSelector::add(CompilerBinary binary)
{
    binaries_.push_back(std::move(binary));
}

bool CompilerSelector::add_executable(const std::filesystem::path& exe)
{
    auto version = query_version(exe);
    if (!version)
        return false;
    add({*version, exe});
    return true;
}

std::optional<CompilerBinary> CompilerSelector::resolve(const VersionConstraint& constraint) const
{
    if (auto pinned = constraint.exact()) {
        for (const auto& b : binaries_)
            if (b.version == *pinned)
                return b;
    }
    std::optional<CompilerBinary> best;
    for (const auto& b : binaries_) {
        if (!constraint.satisfied_by(b.version))
            continue;
        if (!best || b.version > best->version)
            best = b;
    }
    return best;
}

CompilerSelector CompilerSelector::from_environment()
{
    CompilerSelector selector;
    for (const auto& exe : split_path_list(std::getenv("PONZILENS_SOLC")))
        selector.add_executable(exe);
    if (const char* dir = std::getenv("PONZILENS_SOLC_DIR")) {
        std::error_code ec;
        std::vector<std::filesystem::path> found;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(dir, ec)) {
            auto fname = entry.path().filename().string();
            if (entry.is_regular_file() && (fname.rfind("solc", 0) == 0))
                found.push_back(entry.path());
        }
        std::sort(found.begin(), found.end());
        for (const auto& p : found)
            selector.add_executable(p);
    }
    for (const auto& dir : split_path_list(std::getenv("PATH"))) {
        for (const char* name : {"solc", "solcjs"}) {
            auto candidate = std::filesystem::path(dir) / name;
            std::error_code ec;
            if (std::filesystem::is_regular_file(candidate, ec))
                selector.add_executable(candidate);
        }
    }
    return selector;
}

SourceUnit compile_source(SourceUnit unit, const CompilerSelector& selector)
{
    if (unit.files.empty() || is_blank(unit.source_text()))
        throw Error(ErrorCode::CompileError, "source of '" + unit.id + "' is empty");
    if (unit.unsupported)
        throw Error(ErrorCode::UnsupportedVersion,
                    "pragma '" + unit.pragma.value_or("") + "' admits no release in [" + kMinSupportedVersion.str() +
                        ", " + kMaxSupportedVersion.str() + "]");

    VersionConstraint constraint = VersionConstraint::parse(
        unit.pragma.value_or(">=" + kMinSupportedVersion.str() + " <=" + kMaxSupportedVersion.str()));
    auto binary = selector.resolve(constraint);
    if (!binary)
        throw Error(ErrorCode::CompilerNotFound, "no compiler satisfies '" + constraint.text() + "'");

    json input = {{"language", "Solidity"}, {"sources", json::object()},
                  {"settings", {{"outputSelection", {{"*", {{"", json::array({"ast"})}}}}}}}};
    for (const auto& file : unit.files)
        input["sources"][file.name] = {{"content", file.text}};

    detail::ProcessResult result;
    try {
        result = detail::run_process({binary->executable.string(), "--standard-json"}, input.dump());
    } catch (const std::system_error& e) {
        throw Error(ErrorCode::CompilerNotFound, e.what());
    }

    // solc-js may print banner lines before the JSON document.
    auto brace = result.out.find('{');
    if (brace == std::string::npos)
        throw Error(ErrorCode::CompileError, "compiler produced no output: " + result.err);
    json output;
    try {
        output = json::parse(result.out.substr(brace));
    } catch (const json::parse_error&) {
        throw Error(ErrorCode::CompileError, "compiler output is not JSON: " + result.out);
    }

    std::string diagnostics;
    for (const auto& err : output.value("errors", json::array())) {
        if (err.value("severity", "") == "error")
            diagnostics += err.value("formattedMessage", err.value("message", "")) + "\n";
    }
    if (!diagnostics.empty())
        throw Error(ErrorCode::CompileError, diagnostics);
    if (!output.contains("sources") || output["sources"].empty())
        throw Error(ErrorCode::CompileError, "compiler returned no sources");

    json sources = json::object();
    for (const auto& [name, entry] : output["sources"].items())
        sources[name] = {{"id", entry.value("id", 0)}, {"ast", entry.value("ast", json::object())}};

    SourceUnit loaded = load_ast(json{{"sources", sources}}.dump());
    for (auto& file : loaded.files) {
        auto it = std::find_if(unit.files.begin(), unit.files.end(), [&](const SourceFile& f) { return f.name == file.name; });
        if (it != unit.files.end())
            file.text = it->text;
    }
    unit.files = std::move(loaded.files);
    unit.ast_json = std::move(loaded.ast_json);
    unit.compiler_version = binary->version.str();
    return unit;
}

}  // namespace ponzilens
