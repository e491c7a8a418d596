#include "igsim/xdesign/plan.hpp"

#include <set>

#include "igsim/common/errors.hpp"
#include "igsim/common/rng.hpp"

namespace igsim::xdesign {

std::uint64_t run_seed(std::uint64_t base_seed, const ConditionCell& cell, int replicate) {
    return mix_seed({base_seed, fnv1a64(cell.id()), static_cast<std::uint64_t>(replicate)});
}

std::vector<RunConfig> enumerate_runs(const ExperimentPlan& plan) {
    if (plan.runs_per_cell < 1) throw ConfigError("runs_per_cell must be >= 1");
    std::set<std::string> ids;
    for (const auto& c : plan.cells)
        if (!ids.insert(c.id()).second) throw ConfigError("duplicate cell " + c.id() + " in plan");
    std::vector<RunConfig> runs;
    for (std::size_t ci = 0; ci < plan.cells.size(); ++ci) {
        for (int rep = 0; rep < plan.runs_per_cell; ++rep) {
            RunConfig rc;
            rc.cell = plan.cells[ci];
            rc.cell_index = ci;
            rc.replicate = rep;
            rc.run_id = rc.cell.id() + "/" + std::to_string(rep);
            rc.seed = run_seed(plan.base_seed, rc.cell, rep);
            runs.push_back(rc);
        }
    }
    return runs;
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("plan", "plan must be a JSON object");
    ExperimentPlan p;
    if (!j.contains("cells")) throw SchemaError("cells", "plan: missing 'cells'");
    const auto& cells = j["cells"];
    if (cells.is_string()) {
        const auto s = cells.get<std::string>();
        if (s == "threat") p.cells = threat_cells();
        else if (s == "structural") p.cells = structural_cells();
        else throw ConfigError("plan: unknown cell set '" + s + "'");
    } else if (cells.is_array()) {
        for (const auto& c : cells) p.cells.push_back(cell_from_json(c));
    } else {
        throw SchemaError("cells", "plan: 'cells' must be a list or a named set");
    }
    if (p.cells.empty()) throw ConfigError("plan: no cells");
    p.runs_per_cell = j.value("runs_per_cell", 10);
    p.base_seed = j.value("base_seed", std::uint64_t{0});
    p.horizon_days = j.value("horizon_days", 3);
    if (p.runs_per_cell < 1) throw ConfigError("plan: runs_per_cell must be >= 1");
    if (p.horizon_days < 1) throw ConfigError("plan: horizon_days must be >= 1");
    return p;
}

nlohmann::json to_json(const ExperimentPlan& p) {
    auto cells = nlohmann::json::array();
    for (const auto& c : p.cells) cells.push_back(to_json(c));
    return {{"cells", cells}, {"runs_per_cell", p.runs_per_cell}, {"base_seed", p.base_seed}, {"horizon_days", p.horizon_days}};
}

}  // namespace igsim::xdesign
