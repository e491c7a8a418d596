#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/gateway/types.hpp"
#include "igsim/ledger/event_log.hpp"
#include "igsim/ledger/panel.hpp"
#include "igsim/world/persona.hpp"
#include "igsim/xdesign/plan.hpp"

namespace igsim::ctl {

/// Experiment plan plus the simulation inputs it needs. Paths are resolved
/// against the plan file's directory.
struct SimPlan {
    xdesign::ExperimentPlan plan;
    std::optional<long> horizon_hours;  // overrides horizon_days
    int agents = 25;                    // first n personas of the roster
    std::filesystem::path map;
    std::filesystem::path personas;
    std::filesystem::path profile;      // scripted backend profile
    bool probes = true;
    std::vector<std::string> probe_scales;

    long hours() const;
    long horizon_ticks() const;
};

SimPlan sim_plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
SimPlan load_sim_plan(const std::filesystem::path& path);
nlohmann::json to_json(const SimPlan& p);

/// SHA-256 over the plan and the contents of the files it references.
std::string plan_hash(const SimPlan& p);

using GatewayFactory = std::function<std::unique_ptr<gateway::ModelGateway>()>;

/// One run in memory: no files, no checkpoints.
struct RunTrace {
    ledger::StreamHeader events_header;
    ledger::StreamHeader probes_header;
    std::vector<world::EventRecord> events;
    std::vector<world::ProbeRecord> probes;
};

RunTrace simulate_run(const world::WorldMap& map, const std::vector<world::PersonaSpec>& roster,
                      const xdesign::RunConfig& run, long hours, int agents, bool probes, gateway::ModelGateway& gw,
                      const std::vector<std::string>& probe_scales = {});

struct RunOutcome {
    bool ok = false;
    bool resumed = false;
    std::string error;
};

/// One run on disk under `dir` (config.json, events.jsonl, probes.jsonl and,
/// after a gateway failure, checkpoint). With `resume` and a checkpoint
/// present, restarts from the last hour boundary.
RunOutcome run_to_disk(const SimPlan& plan, const world::WorldMap& map, const std::vector<world::PersonaSpec>& roster,
                       const xdesign::RunConfig& run, const std::filesystem::path& dir, gateway::ModelGateway& gw,
                       bool resume);

struct SimOptions {
    bool resume = false;
    unsigned jobs = 1;
    std::function<void(const std::string&)> log;
};

struct SimSummary {
    int done = 0;
    int failed = 0;
    bool noop = false;
};

/// Executes every pending run of the plan under `out` and maintains
/// out/manifest.json. A finished plan is a no-op.
SimSummary run_plan(const SimPlan& plan, const std::filesystem::path& out, const GatewayFactory& factory,
                    const SimOptions& opts = {});

struct DeriveOptions {
    std::uint64_t seed = 0;
    ledger::PanelOptions panel;
    std::function<void(const std::string&)> log;
};

struct DeriveSummary {
    std::size_t runs = 0;
    std::size_t rows = 0;
    bool complete = true;
    std::string error;
};

/// Annotates every finished run (resuming partial annotations) and writes
/// panel.csv and system_panel.csv under `out`.
DeriveSummary derive_panels(const std::filesystem::path& sim_dir, const std::filesystem::path& out,
                            gateway::ModelGateway& classifier, const DeriveOptions& opts = {});

/// Panel for one in-memory run, annotated through `classifier`.
std::vector<ledger::HourlyPanelRow> panel_for_trace(const RunTrace& trace, gateway::ModelGateway& classifier,
                                                   std::uint64_t seed, const ledger::PanelOptions& opts = {});

}  // namespace igsim::ctl
