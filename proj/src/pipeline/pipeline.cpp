#include "ponzilens/error.hpp"
#include "ponzilens/pipeline.hpp"

namespace ponzilens {

std::string_view to_string(Phase phase)
{
    switch (phase) {
    case Phase::Ingest: return "ingest";
    case Phase::Model: return "model";
    case Phase::Hypergraph: return "hypergraph";
    case Phase::Taint: return "taint";
    case Phase::Slice: return "slice";
    case Phase::Render: return "render";
    case Phase::Prompt: return "prompt";
    case Phase::Analysis: return "analysis";
    case Phase::Detection: return "detection";
    }
    return "unknown";
}

namespace {

template <typename F>
auto in_phase(Phase phase, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const PhaseError&) {
        throw;
    } catch (const Error& e) {
        throw PhaseError(phase, e);
    }
}

}  // namespace

StaticResult run_static(const SourceUnit& unit, const StaticOptions& options)
{
    StaticResult r;
    r.models = in_phase(Phase::Model, [&] { return lower(unit); });
    r.graph = in_phase(Phase::Hypergraph, [&] { return build(r.models, &unit, options.build); });
    r.taint = in_phase(Phase::Taint, [&] { return tpa(r.graph, default_sources(r.graph)); });
    r.slices = in_phase(Phase::Slice, [&] {
        return combine_slices(select_functions(r.taint, r.graph, r.models, options.slice), r.graph, &r.models);
    });
    r.dot = in_phase(Phase::Render, [&] { return to_dot(r.taint, r.graph, options.render); });
    return r;
}

SourceUnit ingest(const std::string& id, const std::string& path_or_address, const CompilerSelector* compilers,
                  const FetchConfig* fetch)
{
    return in_phase(Phase::Ingest, [&] {
        SourceUnit unit;
        if (path_or_address.starts_with("0x") && !std::filesystem::exists(path_or_address)) {
            if (fetch == nullptr)
                throw Error(ErrorCode::InvalidArgument, "no explorer configuration for address " + path_or_address);
            unit = fetch_verified_source(path_or_address, *fetch);
            if (compilers == nullptr)
                throw Error(ErrorCode::CompilerNotFound, "fetched source needs a Solidity compiler");
            unit = compile_source(std::move(unit), *compilers);
        } else {
            if (!std::filesystem::exists(path_or_address))
                throw Error(ErrorCode::IoError, "no such file: " + path_or_address);
            unit = read_source_path(path_or_address, compilers);
        }
        if (unit.unsupported)
            throw Error(ErrorCode::UnsupportedVersion,
                        "pragma '" + unit.pragma.value_or("") + "' admits no supported compiler release");
        if (!id.empty())
            unit.id = id;
        unit.path_or_address = path_or_address;
        return unit;
    });
}

}  // namespace ponzilens
