#pragma once

#include "ponzilens/taint.hpp"

#include <map>
#include <string>
#include <vector>

namespace ponzilens {

struct SliceOptions
{
    /// Also select a contract's constructor once any state variable owned by
    /// it or one of its bases is tainted.
    bool include_constructors = true;
};

struct SliceStats
{
    std::size_t functions_total = 0;
    std::size_t selected = 0;
    std::size_t bytes = 0;
    std::vector<std::string> skipped;  // ids without a usable span
};

struct SliceBundle
{
    std::vector<std::string> selected;               // qualified ids, source order
    std::string combined_text;
    std::map<std::string, std::string> per_function;
    /// Declarations referenced by the selection, kept apart from
    /// combined_text and only prepended when building prompts.
    std::string header;
    SliceStats stats;
};

/// Functions (qualified "Contract.id") whose def/use sets meet a tainted
/// variable node, in source order.
std::vector<std::string> select_functions(const TaintSubgraph& t, const HypernodeGraph& h,
                                          const std::vector<ContractModel>& models, const SliceOptions& options = {});

/// Joins the source text of each selected function with blank lines. With
/// `models`, also fills the declaration header and `functions_total`.
SliceBundle combine_slices(const std::vector<std::string>& selected, const HypernodeGraph& h,
                           const std::vector<ContractModel>* models = nullptr);

}  // namespace ponzilens
