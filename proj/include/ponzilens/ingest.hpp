#pragma once

#include "ponzilens/semver.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ponzilens {

struct SourceFile
{
    std::string name;
    std::string text;
};

/// One compilation input: Solidity text and/or the compiler's AST for it.
///
/// `files` is indexed by the compiler's source id, so the third field of an
/// AST `src` attribute ("offset:length:file") indexes straight into it.
struct SourceUnit
{
    std::string id;
    std::string path_or_address;
    std::vector<SourceFile> files;
    std::optional<std::string> pragma;
    bool unsupported = false;
    /// Normalised compiler output: {"sources": {name: {"id": n, "ast": {...}}}}.
    std::optional<nlohmann::json> ast_json;
    std::string compiler_version;

    /// Text of the primary file (source id 0), empty when unknown.
    [[nodiscard]] const std::string& source_text() const;
    [[nodiscard]] const std::string* file_text(int file_index) const;
    [[nodiscard]] std::optional<Version> pragma_version() const;
};

/// Builds a unit from raw Solidity text: records the pragma and flags units
/// whose pragma admits no supported release.
SourceUnit make_source_unit(std::string id, std::string path_or_address, std::string file_name, std::string text);

struct CompilerBinary
{
    Version version;
    std::filesystem::path executable;
};

/// Version-resolution policy for `compile_source`: an exact pragma pin wins,
/// otherwise the highest registered release that satisfies the pragma.
class CompilerSelector
{
public:
    void add(CompilerBinary binary);
    /// Queries `<exe> --version`; returns false when the output carries no version.
    bool add_executable(const std::filesystem::path& exe);
    [[nodiscard]] std::optional<CompilerBinary> resolve(const VersionConstraint& constraint) const;
    [[nodiscard]] const std::vector<CompilerBinary>& binaries() const { return binaries_; }

    /// Scans `PONZILENS_SOLC` (':'-separated executables), `PONZILENS_SOLC_DIR`
    /// and `solc` / `solcjs` on PATH.
    static CompilerSelector from_environment();

private:
    std::vector<CompilerBinary> binaries_;
};

/// Runs the compiler in standard-JSON mode and stores the AST of every source.
SourceUnit compile_source(SourceUnit unit, const CompilerSelector& selector);

/// Accepts the normalised document written by `to_ast_document`, a raw
/// standard-JSON compiler output, or a bare `SourceUnit` AST node.
SourceUnit load_ast(std::string_view document);

/// Serialises a compiled unit together with its source text, suitable for
/// `load_ast` (the `.ast.json` fixture format).
nlohmann::json to_ast_document(const SourceUnit& unit);

/// Reads `.sol` or `.ast.json` from disk. For an AST document without embedded
/// text, a sibling `<stem>.sol` is used when present.
SourceUnit read_source_path(const std::filesystem::path& path, const CompilerSelector* selector);

struct FetchConfig
{
    std::string api_base_url = "https://api.etherscan.io/api";
    std::string api_key;
    double rate_limit = 5.0;   // requests per second
    double timeout = 30.0;     // seconds
    int max_retries = 3;       // for rate-limited responses

    void validate() const;
};

/// Shared limiter: at most `rate` acquisitions in any one-second window.
class RateLimiter
{
public:
    explicit RateLimiter(double rate);
    void acquire();
    [[nodiscard]] double rate() const { return rate_; }

private:
    using Clock = std::chrono::steady_clock;
    double rate_;
    std::mutex mutex_;
    std::deque<Clock::time_point> recent_;
};

bool is_valid_address(std::string_view address);

/// Pulls verified source from an Etherscan-compatible explorer. Multi-file
/// submissions are flattened in declaration order with `// File:` markers.
SourceUnit fetch_verified_source(std::string_view address, const FetchConfig& cfg, RateLimiter& limiter);
SourceUnit fetch_verified_source(std::string_view address, const FetchConfig& cfg);

}  // namespace ponzilens
