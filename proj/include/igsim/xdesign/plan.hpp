#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/xdesign/condition.hpp"

namespace igsim::xdesign {

struct ExperimentPlan {
    std::vector<ConditionCell> cells;
    int runs_per_cell = 10;
    std::uint64_t base_seed = 0;
    int horizon_days = 3;
};

struct RunConfig {
    std::string run_id;  // "<cell id>/<replicate>"
    ConditionCell cell;
    std::size_t cell_index = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
};

/// hash(base_seed, cell, replicate).
std::uint64_t run_seed(std::uint64_t base_seed, const ConditionCell& cell, int replicate);

/// One RunConfig per (cell, replicate), cell-major. Stable across invocations.
std::vector<RunConfig> enumerate_runs(const ExperimentPlan& plan);

/// Accepts "cells" as a list of cell objects or as the shorthand strings
/// "threat" (2x2) and "structural" (2x2x2x2).
ExperimentPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentPlan& plan);

}  // namespace igsim::xdesign
