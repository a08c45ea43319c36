#pragma once

#include "ponzilens/error.hpp"
#include "ponzilens/render.hpp"
#include "ponzilens/slice.hpp"

namespace ponzilens {

struct StaticOptions
{
    BuildOptions build;
    SliceOptions slice;
    RenderOptions render;
};

/// Everything the static phase derives from one source unit.
struct StaticResult
{
    std::vector<ContractModel> models;
    HypernodeGraph graph;
    TaintSubgraph taint;
    SliceBundle slices;
    DotDocument dot;
};

/// Stage of the static phase, used to attribute failures.
enum class Phase { Ingest, Model, Hypergraph, Taint, Slice, Render, Prompt, Analysis, Detection };

std::string_view to_string(Phase phase);

/// Raised by `run_static` and the detector; wraps the underlying Error.
class PhaseError : public Error
{
public:
    PhaseError(Phase phase, const Error& cause)
        : Error(cause.code(), cause.what())
        , phase_(phase)
    {}

    [[nodiscard]] Phase phase() const noexcept { return phase_; }

private:
    Phase phase_;
};

/// lower -> build -> tpa -> select/combine -> to_dot.
StaticResult run_static(const SourceUnit& unit, const StaticOptions& options = {});

/// Loads a unit from a `.sol` / `.ast.json` path or, for a 0x address, from the
/// explorer. Failures surface as PhaseError(Ingest).
SourceUnit ingest(const std::string& id, const std::string& path_or_address, const CompilerSelector* compilers,
                  const FetchConfig* fetch);

}  // namespace ponzilens
