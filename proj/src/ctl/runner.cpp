#include "igsim/ctl/runner.hpp"

#include <fstream>
#include <mutex>

#include "igsim/common/io.hpp"
#include "igsim/common/parallel.hpp"
#include "igsim/common/sha256.hpp"
#include "igsim/ctl/manifest.hpp"
#include "igsim/ledger/annotate.hpp"
#include "igsim/world/checkpoint.hpp"
#include "igsim/world/clock.hpp"
#include "igsim/world/sim.hpp"

namespace igsim::ctl {

namespace fs = std::filesystem;

long SimPlan::hours() const { return horizon_hours ? *horizon_hours : plan.horizon_days * 24L; }
long SimPlan::horizon_ticks() const { return world::ticks_for_hours(hours()); }

SimPlan sim_plan_from_json(const nlohmann::json& j, const fs::path& base) {
    SimPlan p;
    p.plan = xdesign::plan_from_json(j);
    if (j.contains("horizon_hours")) {
        p.horizon_hours = j["horizon_hours"].get<long>();
        if (*p.horizon_hours < 1) throw ConfigError("plan: horizon_hours must be >= 1");
    }
    p.agents = j.value("agents", 25);
    if (p.agents < 2) throw ConfigError("plan: at least two agents are needed");
    auto path = [&](const char* key) {
        if (!j.contains(key)) throw SchemaError(key, std::string("plan: missing '") + key + "'");
        fs::path v = j[key].get<std::string>();
        return fs::absolute(v.is_absolute() ? v : base / v).lexically_normal();
    };
    p.map = path("map");
    p.personas = path("personas");
    if (j.contains("profile")) p.profile = path("profile");
    p.probes = j.value("probes", true);
    if (j.contains("probe_scales")) p.probe_scales = j["probe_scales"].get<std::vector<std::string>>();
    return p;
}

SimPlan load_sim_plan(const fs::path& path) {
    return sim_plan_from_json(load_json(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

nlohmann::json to_json(const SimPlan& p) {
    auto j = xdesign::to_json(p.plan);
    if (p.horizon_hours) j["horizon_hours"] = *p.horizon_hours;
    j["agents"] = p.agents;
    j["map"] = p.map.string();
    j["personas"] = p.personas.string();
    if (!p.profile.empty()) j["profile"] = p.profile.string();
    j["probes"] = p.probes;
    if (!p.probe_scales.empty()) j["probe_scales"] = p.probe_scales;
    return j;
}

std::string plan_hash(const SimPlan& p) {
    auto j = to_json(p);
    j.erase("map");
    j.erase("personas");
    j.erase("profile");
    std::string material = j.dump();
    for (const auto& f : {p.map, p.personas, p.profile})
        if (!f.empty()) material += "\n" + sha256_hex(read_file(f));
    return sha256_hex(material);
}

namespace {

std::vector<world::PersonaSpec> first_n(const std::vector<world::PersonaSpec>& roster, int n) {
    if (n > static_cast<int>(roster.size()))
        throw ConfigError("plan asks for " + std::to_string(n) + " agents but the roster has " + std::to_string(roster.size()));
    return {roster.begin(), roster.begin() + n};
}

world::WorldConfig world_config(const xdesign::RunConfig& run, long hours, bool probes,
                                const std::vector<std::string>& scales) {
    world::WorldConfig cfg;
    cfg.run_id = run.run_id;
    cfg.cell = run.cell;
    cfg.seed = run.seed;
    cfg.horizon_ticks = world::ticks_for_hours(hours);
    cfg.probes = probes;
    cfg.probe_scales = scales;
    return cfg;
}

ledger::StreamHeader header_for(const world::World& w, const xdesign::RunConfig& run, long hours, const char* schema) {
    ledger::StreamHeader h;
    h.schema = schema;
    h.run_id = run.run_id;
    h.cell = run.cell;
    h.hours = hours;
    h.seed = run.seed;
    for (const auto& a : w.agents()) {
        h.agents.push_back(a.persona.name);
        h.groups.push_back(xdesign::group_letter(a.group));
    }
    return h;
}

}  // namespace

RunTrace simulate_run(const world::WorldMap& map, const std::vector<world::PersonaSpec>& roster,
                      const xdesign::RunConfig& run, long hours, int agents, bool probes, gateway::ModelGateway& gw,
                      const std::vector<std::string>& scales) {
    world::World w(map, first_n(roster, agents), world_config(run, hours, probes, scales));
    RunTrace t;
    t.events_header = header_for(w, run, hours, ledger::kEventSchema);
    t.probes_header = header_for(w, run, hours, ledger::kProbeSchema);
    while (!w.done()) {
        auto out = w.step(gw);
        for (auto& e : out.events) t.events.push_back(std::move(e));
        for (auto& p : out.probes) t.probes.push_back(std::move(p));
    }
    return t;
}

RunOutcome run_to_disk(const SimPlan& plan, const world::WorldMap& map, const std::vector<world::PersonaSpec>& roster,
                       const xdesign::RunConfig& run, const fs::path& dir, gateway::ModelGateway& gw, bool resume) {
    fs::create_directories(dir);
    world::World w(map, first_n(roster, plan.agents), world_config(run, plan.hours(), plan.probes, plan.probe_scales));
    const auto ev_header = header_for(w, run, plan.hours(), ledger::kEventSchema);
    const auto pr_header = header_for(w, run, plan.hours(), ledger::kProbeSchema);
    const auto cp_path = dir / "checkpoint";

    nlohmann::json config = {{"run_id", run.run_id},       {"cell", xdesign::to_json(run.cell)},
                             {"replicate", run.replicate}, {"seed", run.seed},
                             {"hours", plan.hours()},      {"agents", plan.agents},
                             {"probes", plan.probes},      {"plan_hash", plan_hash(plan)}};
    write_file_atomic(dir / "config.json", config.dump(2) + "\n");

    RunOutcome outcome;
    world::Checkpoint cp;
    const bool from_checkpoint = resume && fs::exists(cp_path);
    if (from_checkpoint) {
        cp = world::read_checkpoint(cp_path);
        if (cp.run_id != run.run_id) throw IntegrityError("checkpoint in " + dir.string() + " belongs to " + cp.run_id);
        w.restore(cp.snapshot);
        outcome.resumed = true;
    }
    ledger::EventWriter ev(dir / "events.jsonl", ev_header, !from_checkpoint, cp.event_lines);
    ledger::ProbeWriter pr(dir / "probes.jsonl", pr_header, !from_checkpoint, cp.probe_lines);

    world::Checkpoint last{run.run_id, w.snapshot(), ev.records(), pr.records()};
    try {
        while (!w.done()) {
            if (w.tick() % world::kTicksPerHour == 0) {
                ev.flush();
                pr.flush();
                last = {run.run_id, w.snapshot(), ev.records(), pr.records()};
            }
            auto out = w.step(gw);
            for (const auto& e : out.events) ev.append(e);
            for (const auto& p : out.probes) pr.append(p);
        }
        ev.flush();
        pr.flush();
    } catch (const gateway::GatewayError& e) {
        ev.flush();
        pr.flush();
        world::write_checkpoint(cp_path, last);
        outcome.error = std::string(e.what()) + " (checkpoint kept " + std::to_string(last.event_lines) + " events)";
        return outcome;
    }
    std::error_code ec;
    fs::remove(cp_path, ec);
    outcome.ok = true;
    return outcome;
}

SimSummary run_plan(const SimPlan& plan, const fs::path& out, const GatewayFactory& factory, const SimOptions& opts) {
    auto log = [&](const std::string& m) {
        if (opts.log) opts.log(m);
    };
    fs::create_directories(out);
    const auto manifest_path = out / "manifest.json";
    const auto hash = plan_hash(plan);
    const auto runs = xdesign::enumerate_runs(plan.plan);

    RunManifest manifest;
    if (fs::exists(manifest_path)) {
        manifest = load_manifest(manifest_path);
        if (manifest.plan_hash != hash)
            throw ManifestError("output directory " + out.string() + " holds a different plan (hash mismatch)");
        if (manifest.all_done()) {
            log("plan already complete; nothing to do");
            return {static_cast<int>(manifest.runs.size()), 0, true};
        }
        if (opts.resume)
            for (auto& r : manifest.runs) manifest.reopen(r.run_id);
    } else {
        manifest.plan_hash = hash;
        for (const auto& r : runs) manifest.runs.push_back({r.run_id, RunStatus::pending, "runs/" + r.run_id, ""});
    }
    save_manifest(manifest_path, manifest);
    if (!fs::exists(out / "plan.json")) write_file_atomic(out / "plan.json", to_json(plan).dump(2) + "\n");

    const auto map = world::WorldMap::load(plan.map);
    const auto roster = world::load_personas(plan.personas, map);
    std::vector<const xdesign::RunConfig*> todo;
    for (const auto& r : runs)
        if (manifest.entry(r.run_id).status == RunStatus::pending) todo.push_back(&r);

    std::mutex mu;
    auto set_status = [&](const std::string& id, RunStatus s, const std::string& err = "") {
        std::lock_guard lock(mu);
        manifest.transition(id, s, err);
        save_manifest(manifest_path, manifest);
    };
    parallel_for(
        todo.size(),
        [&](std::size_t k) {
            const auto& run = *todo[k];
            set_status(run.run_id, RunStatus::running);
            RunOutcome res;
            try {
                auto gw = factory();
                res = run_to_disk(plan, map, roster, run, out / "runs" / run.run_id, *gw, opts.resume);
            } catch (const std::exception& e) {
                res.ok = false;
                res.error = e.what();
            }
            set_status(run.run_id, res.ok ? RunStatus::done : RunStatus::failed, res.error);
            log(run.run_id + (res.ok ? (res.resumed ? ": done (resumed)" : ": done") : ": FAILED: " + res.error));
        },
        std::max(1u, opts.jobs));

    SimSummary s;
    for (const auto& r : manifest.runs) {
        if (r.status == RunStatus::done) ++s.done;
        else ++s.failed;
    }
    return s;
}

std::vector<ledger::HourlyPanelRow> panel_for_trace(const RunTrace& trace, gateway::ModelGateway& classifier,
                                                   std::uint64_t seed, const ledger::PanelOptions& opts) {
    ledger::KeywordScorer scorer;
    auto res = ledger::annotate_hostility(trace.events, classifier, trace.events_header.cell, seed, &scorer);
    if (!res.complete) throw gateway::GatewayError("annotation stopped: " + res.error, "annotate");
    return ledger::build_hourly_panel(trace.events_header, res.annotated, trace.probes, opts);
}

DeriveSummary derive_panels(const fs::path& sim_dir, const fs::path& out, gateway::ModelGateway& classifier,
                            const DeriveOptions& opts) {
    const auto manifest = load_manifest(sim_dir / "manifest.json");
    ledger::KeywordScorer scorer;
    std::vector<std::vector<ledger::HourlyPanelRow>> panels;
    DeriveSummary s;
    for (const auto& r : manifest.runs) {
        if (r.status != RunStatus::done) continue;
        const auto dir = sim_dir / r.dir;
        const auto events = ledger::read_events(dir / "events.jsonl");
        const auto probes = ledger::read_probes(dir / "probes.jsonl");
        const auto done_path = dir / "annotated.jsonl";
        const auto partial_path = dir / "annotated.partial.jsonl";
        std::vector<ledger::AnnotatedEvent> annotated;
        if (fs::exists(done_path)) {
            annotated = ledger::read_annotated(done_path);
        } else {
            ledger::AnnotationProgress resume;
            if (fs::exists(partial_path)) {
                resume.annotated = ledger::read_annotated(partial_path);
                resume.cursor = resume.annotated.size();
            }
            auto res = ledger::annotate_hostility(events.events, classifier, events.header.cell, opts.seed, &scorer,
                                                  std::move(resume));
            if (!res.complete) {
                ledger::write_annotated(partial_path, res.annotated);
                s.complete = false;
                s.error = r.run_id + ": " + res.error + " (annotated " + std::to_string(res.cursor) + " of " +
                          std::to_string(events.events.size()) + ")";
                return s;
            }
            ledger::write_annotated(done_path, res.annotated);
            std::error_code ec;
            fs::remove(partial_path, ec);
            annotated = std::move(res.annotated);
        }
        panels.push_back(ledger::build_hourly_panel(events.header, annotated, probes.probes, opts.panel));
        ++s.runs;
        if (opts.log) opts.log(r.run_id + ": " + std::to_string(annotated.size()) + " events annotated");
    }
    const auto panel = ledger::concat_panels(panels);
    fs::create_directories(out);
    ledger::panel_frame(panel).write_csv(out / "panel.csv");
    ledger::system_frame(ledger::aggregate_system(panel)).write_csv(out / "system_panel.csv");
    s.rows = panel.size();
    return s;
}

}  // namespace igsim::ctl
