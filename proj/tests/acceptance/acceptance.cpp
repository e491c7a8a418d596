// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "fixtures.hpp"
#include "generators.hpp"
#include "igsim/common/io.hpp"
#include "igsim/ctl/manifest.hpp"
#include "igsim/ctl/models.hpp"
#include "igsim/ctl/runner.hpp"
#include "igsim/inferkit/design.hpp"
#include "igsim/inferkit/mediation.hpp"
#include "igsim/inferkit/nb2.hpp"
#include "igsim/inferkit/ols.hpp"
#include "igsim/inferkit/two_sample.hpp"
#include "igsim/ledger/annotate.hpp"
#include "igsim/ledger/panel.hpp"
#include "igsim/ledger/scorer.hpp"
#include "igsim/statespace/analysis.hpp"
#include "igsim/statespace/concept_vector.hpp"
#include "igsim/xdesign/assignment.hpp"
#include "oracles.hpp"

using namespace igsim;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kMaxMiniSeconds = 60.0;
constexpr double kMinCosine = 0.99;
constexpr int kMinCosineSeeds = 99;
constexpr double kPlantedD = 3.0;
constexpr double kPlantedBand = 0.15;
constexpr double kWelchTol = 1e-9;
constexpr double kWassersteinTol = 1e-12;
constexpr double kOlsTol = 1e-10;
constexpr int kStatInstances = 200;
constexpr std::size_t kNb2Rows = 5000;
constexpr int kNb2Reps = 100;
constexpr int kNb2MinCovered = 95;
constexpr double kNb2SeBand = 3.0;
constexpr double kOffsetTol = 1e-6;
constexpr int kE2eAgents = 10;
constexpr long kE2eHours = 24;
constexpr int kE2eRunsPerCell = 10;
constexpr int kE2eMetaSeeds = 10;
constexpr int kE2eMinOrdering = 9;
constexpr int kE2eMinInteraction = 8;
constexpr int kSegregationSplits = 100;
constexpr int kMediationSeeds = 100;
constexpr int kMediationMin = 90;
constexpr int kMediationReplicates = 400;
constexpr int kMediationClusters = 40;
constexpr int kMediationRows = 30;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

struct Inputs {
    ctl::SimPlan mini = ctl::load_sim_plan(test::data_dir() / "plans" / "mini.json");
    world::WorldMap map = world::WorldMap::load(mini.map);
    std::vector<world::PersonaSpec> roster = world::load_personas(mini.personas, map);
    gateway::ScriptedProfile profile = gateway::ScriptedProfile::load(mini.profile);
};

Inputs& inputs() {
    static Inputs in;
    return in;
}

// events.jsonl of every run, keyed by run id
std::map<std::string, std::string> run_mini(const ctl::SimPlan& plan, const fs::path& out) {
    const auto factory = [&] { return std::make_unique<gateway::ScriptedGateway>(inputs().profile); };
    const auto s = ctl::run_plan(plan, out, factory);
    if (s.failed) throw std::runtime_error(std::to_string(s.failed) + " runs failed");
    std::map<std::string, std::string> logs;
    for (const auto& r : ctl::load_manifest(out / "manifest.json").runs)
        logs[r.run_id] = read_file(out / r.dir / "events.jsonl");
    return logs;
}

Verdict determinism() {
    const auto dir = test::scratch_dir("acc_determinism");
    const auto t0 = std::chrono::steady_clock::now();
    const auto first = run_mini(inputs().mini, dir / "a");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto second = run_mini(inputs().mini, dir / "b");
    auto reseeded = inputs().mini;
    reseeded.plan.base_seed += 1;
    const auto third = run_mini(reseeded, dir / "c");

    std::size_t bytes = 0;
    for (const auto& [id, log] : first) bytes += log.size();
    const bool same = first == second && !first.empty();
    bool differs = false;
    for (const auto& [id, log] : first) differs = differs || third.at(id) != log;
    return {same && differs && secs < kMaxMiniSeconds,
            std::to_string(first.size()) + " runs, " + std::to_string(bytes) + " bytes; identical=" +
                (same ? "yes" : "no") + ", reseeded differs=" + (differs ? "yes" : "no") + ", " + fmt(secs, 3) +
                " s (limit " + fmt(kMaxMiniSeconds) + ")"};
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Verdict planted_direction() {
    const test::PlantedSpec spec;
    int cos_ok = 0;
    double cos_sum = 0, cos_min = 1, d_sum = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto ext = test::planted_dump(s, 1000 + s, spec, "ext");
        const auto held = test::planted_dump(s, 2000 + s, spec, "held");
        const auto v = statespace::mean_diff_vector(ext.dump, "a", "b", spec.planted_layer);
        const double c = dot(v.direction, ext.direction);
        cos_ok += c >= kMinCosine;
        cos_sum += c;
        cos_min = std::min(cos_min, c);
        const auto proj = statespace::project(held.dump, v);
        const auto a = proj.scores_for("a"), b = proj.scores_for("b");
        d_sum += inferkit::welch_cohen(a, b).cohen_d;
    }
    const double d_mean = d_sum / 100;
    const bool d_ok = std::abs(d_mean - kPlantedD) <= kPlantedBand * kPlantedD;
    return {cos_ok >= kMinCosineSeeds && d_ok,
            "cosine>=" + fmt(kMinCosine) + " in " + std::to_string(cos_ok) + "/100 (need " +
                std::to_string(kMinCosineSeeds) + "; mean " + fmt(cos_sum / 100) + ", min " + fmt(cos_min) +
                "); held-out d mean " + fmt(d_mean) + " vs " + fmt(kPlantedD) + " +-" +
                fmt(100 * kPlantedBand) + "%"};
}

std::vector<double> normals(std::mt19937_64& g, std::size_t n, double mu, double sd) {
    std::normal_distribution<double> z(mu, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = z(g);
    return v;
}

Verdict stats_oracles() {
    std::mt19937_64 g(20240501);
    std::uniform_int_distribution<int> size(2, 80);
    double welch_err = 0, w_err = 0, ols_err = 0;
    for (int k = 0; k < kStatInstances; ++k) {
        const auto x = normals(g, size(g), 0.5 * (k % 5), 1.0 + k % 3);
        const auto y = normals(g, size(g), 0.0, 0.5 + k % 4);
        const auto r = inferkit::welch_cohen(x, y);
        const auto o = test::welch_oracle(x, y);
        welch_err = std::max({welch_err, std::abs(r.t - o.t) / std::max(1.0, std::abs(o.t)),
                              std::abs(r.df - o.df) / std::max(1.0, o.df)});
    }
    for (int k = 0; k < kStatInstances; ++k) {
        const std::size_t n = size(g);
        const auto x = normals(g, n, 0.3 * (k % 4), 1.0);
        const auto y = normals(g, n, 0.0, 1.0 + 0.25 * (k % 3));
        w_err = std::max(w_err, std::abs(inferkit::wasserstein_distance(x, y) - test::wasserstein_oracle(x, y)));
    }
    std::uniform_int_distribution<int> rows(12, 300);
    for (int k = 0; k < kStatInstances; ++k) {
        const std::size_t n = rows(g);
        const int p = 1 + k % 4;
        Eigen::MatrixXd X(n, p + 1);
        Eigen::VectorXd yv(n);
        inferkit::Frame f;
        std::string formula;
        for (int j = 0; j < p; ++j) {
            const auto col = normals(g, n, j, 1.0 + j);
            const auto name = "x" + std::to_string(j);
            f.add_numeric(name, col);
            formula += (j ? " + " : "") + name;
            for (std::size_t i = 0; i < n; ++i) X(i, j + 1) = col[i];
        }
        const auto noise = normals(g, n, 0, 1);
        std::vector<double> yy(n);
        for (std::size_t i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            yy[i] = 0.5 + noise[i];
            for (int j = 0; j < p; ++j) yy[i] += (j + 1) * 0.3 * X(i, j + 1);
            yv(i) = yy[i];
        }
        f.add_numeric("y", yy);
        inferkit::ModelSpec spec;
        spec.response = "y";
        spec.terms = inferkit::parse_terms(formula);
        const auto fit = inferkit::ols_fit(f, spec);
        const auto o = test::ols_oracle(X, yv);
        ols_err = std::max(ols_err, (fit.beta - o).cwiseAbs().maxCoeff());
    }
    const bool ok = welch_err <= kWelchTol && w_err <= kWassersteinTol && ols_err <= kOlsTol;
    return {ok, std::to_string(kStatInstances) + " instances each; max err welch " + fmt(welch_err, 3) + " (tol " +
                    fmt(kWelchTol) + "), wasserstein " + fmt(w_err, 3) + " (tol " + fmt(kWassersteinTol) +
                    "), ols " + fmt(ols_err, 3) + " (tol " + fmt(kOlsTol) + ")"};
}

Verdict nb2_recovery() {
    const test::Nb2Truth truth;
    inferkit::ModelSpec spec;
    spec.response = "y";
    spec.terms = inferkit::parse_terms("x1 + x2");
    spec.offset = "exposure";
    const std::map<std::string, double> want = {{"(Intercept)", truth.b0}, {"x1", truth.b1}, {"x2", truth.b2}};
    int covered = 0;
    double off_err = 0;
    for (int r = 0; r < kNb2Reps; ++r) {
        const auto f = test::nb2_frame(5000 + r, kNb2Rows, truth, true);
        const auto fit = inferkit::nb2_fit(f, spec);
        bool all = true;
        for (const auto& [name, b] : want) all = all && std::abs(fit.coef(name) - b) <= kNb2SeBand * fit.stderr_of(name);
        covered += all;
        if (r < 10) {
            inferkit::Frame g;
            for (const auto& c : f.columns())
                if (c != "exposure") g.add_numeric(c, f.numeric(c));
            auto e = f.numeric("exposure");
            for (auto& v : e) v *= 2;
            g.add_numeric("exposure", e);
            const auto doubled = inferkit::nb2_fit(g, spec);
            for (const auto* n : {"x1", "x2"}) off_err = std::max(off_err, std::abs(doubled.coef(n) - fit.coef(n)));
        }
    }
    return {covered >= kNb2MinCovered && off_err <= kOffsetTol,
            "all betas within " + fmt(kNb2SeBand) + " SE in " + std::to_string(covered) + "/" +
                std::to_string(kNb2Reps) + " (need " + std::to_string(kNb2MinCovered) +
                "); offset doubling max change " + fmt(off_err, 3) + " (tol " + fmt(kOffsetTol) + ")"};
}

std::vector<xdesign::ConditionCell> all_cells() {
    auto cells = xdesign::threat_cells();
    for (const auto& c : xdesign::structural_cells())
        if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
    return cells;
}

Verdict e2e_signs() {
    auto& in = inputs();
    gateway::ScriptedGateway gw(in.profile);
    ledger::PanelOptions popts;
    popts.social_only = true;
    int ordering = 0, interaction = 0;
    std::string betas;
    for (int m = 0; m < kE2eMetaSeeds; ++m) {
        xdesign::ExperimentPlan plan;
        plan.cells = xdesign::threat_cells();
        plan.runs_per_cell = kE2eRunsPerCell;
        plan.base_seed = 9000 + static_cast<std::uint64_t>(m);
        std::vector<std::vector<ledger::HourlyPanelRow>> panels;
        for (const auto& run : xdesign::enumerate_runs(plan)) {
            const auto trace = ctl::simulate_run(in.map, in.roster, run, kE2eHours, kE2eAgents, false, gw);
            panels.push_back(ctl::panel_for_trace(trace, gw, run.seed, popts));
        }
        const auto fit = ctl::fit_model(ledger::panel_frame(ledger::concat_panels(panels)), "m1");
        const double br = fit.beta("realistic"), bs = fit.beta("symbolic"), bx = fit.beta("symbolic:realistic");
        ordering += br > bs && bs > 0;
        interaction += bx < 0;
        betas += (m ? "; " : "") + fmt(br, 3) + "/" + fmt(bs, 3) + "/" + fmt(bx, 3);
    }
    return {ordering >= kE2eMinOrdering && interaction >= kE2eMinInteraction,
            "real>sym>0 in " + std::to_string(ordering) + "/" + std::to_string(kE2eMetaSeeds) + " (need " +
                std::to_string(kE2eMinOrdering) + "), interaction<0 in " + std::to_string(interaction) + "/" +
                std::to_string(kE2eMetaSeeds) + " (need " + std::to_string(kE2eMinInteraction) +
                "); real/sym/inter per seed: " + betas};
}

// Exact bookkeeping of one run's panel against its annotated events.
std::string check_panel(const ctl::RunTrace& trace, const std::vector<ledger::AnnotatedEvent>& ann,
                        const std::vector<ledger::HourlyPanelRow>& panel, bool social_only, long hours, int agents) {
    if (panel.size() != static_cast<std::size_t>(hours * agents)) return "panel is not dense";
    std::map<std::pair<int, long>, const ledger::HourlyPanelRow*> at;
    for (const auto& r : panel) at[{r.agent_index, r.hour}] = &r;
    if (at.size() != panel.size()) return "duplicate (agent, hour)";
    std::map<std::pair<int, long>, std::array<long, 3>> want;  // hostile, contact, offset
    for (const auto& a : ann) {
        const long hour = a.event.tick / 360;
        if (hour != a.event.sim_hour) return "event hour disagrees with its tick";
        auto& w = want[{a.event.initiator_index, hour}];
        w[0] += a.hostile.value_or(false);
        w[1] += a.contact;
        w[2] += social_only ? a.event.social : 1;
    }
    long total_rows = 0;
    for (const auto& [key, r] : at) {
        const auto it = want.find(key);
        const std::array<long, 3> w = it == want.end() ? std::array<long, 3>{0, 0, 0} : it->second;
        if (r->hostile_count != w[0] || r->contact_count != w[1] || r->total_actions != w[2])
            return "counts differ at agent " + std::to_string(key.first) + " hour " + std::to_string(key.second);
        total_rows += r->total_actions;
        if (key.second == 0) {
            if (r->hostile_lag || r->total_lag || r->contact_lag) return "lag present at hour 0";
        } else {
            const auto* prev = at.at({key.first, key.second - 1});
            if (r->hostile_lag != prev->hostile_count || r->total_lag != prev->total_actions ||
                r->contact_lag != prev->contact_count)
                return "lag misaligned at agent " + std::to_string(key.first) + " hour " + std::to_string(key.second);
        }
    }
    long events_total = 0;
    for (const auto& a : ann) events_total += social_only ? a.event.social : 1;
    if (total_rows != events_total) return "offset totals differ";
    (void)trace;
    return {};
}

Verdict panel_conservation() {
    auto& in = inputs();
    gateway::ScriptedGateway gw(in.profile);
    ledger::KeywordScorer scorer;
    xdesign::ExperimentPlan plan;
    plan.cells = all_cells();
    plan.runs_per_cell = 3;
    plan.base_seed = 31;
    int runs = 0;
    long rows = 0;
    for (const auto& run : xdesign::enumerate_runs(plan)) {
        const auto trace = ctl::simulate_run(in.map, in.roster, run, kE2eHours, kE2eAgents, true, gw);
        const auto ann = ledger::annotate_hostility(trace.events, gw, run.cell, run.seed, &scorer);
        if (!ann.complete) return {false, "annotation incomplete on " + run.run_id};
        for (bool social_only : {false, true}) {
            ledger::PanelOptions opts;
            opts.social_only = social_only;
            const auto panel = ledger::build_hourly_panel(trace.events_header, ann.annotated, trace.probes, opts);
            const auto err = check_panel(trace, ann.annotated, panel, social_only, kE2eHours, kE2eAgents);
            if (!err.empty()) return {false, run.run_id + ": " + err};
            rows += static_cast<long>(panel.size());
        }
        ++runs;
    }
    return {true, std::to_string(runs) + " runs, " + std::to_string(rows) + " panel rows checked exactly"};
}

// 13 homes around (2,2) and 12 around (20,20), offsets within +-1.
std::vector<xdesign::HomePoint> two_cluster_fixture() {
    std::vector<xdesign::HomePoint> h;
    for (int i = 0; i < 25; ++i) {
        const int base = i < 13 ? 2 : 20;
        h.push_back({base + (i % 3) - 1, base + ((i / 3) % 3) - 1});
    }
    return h;
}

struct SplitTally {
    int beaten = 0;
    double margin = INFINITY;  // d_seg - max random
    int rank95_ok = 0;
};

SplitTally tally_splits(const std::vector<xdesign::HomePoint>& homes, bool asym) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < homes.size(); ++i) names.push_back("p" + std::to_string(i));
    const xdesign::ConditionCell seg{xdesign::Threat::none, xdesign::Threat::none, true, asym};
    const xdesign::ConditionCell rnd{xdesign::Threat::none, xdesign::Threat::none, false, asym};
    const double d_seg = xdesign::assign_groups(names, homes, 1, seg).mean_between_distance;
    std::vector<double> d_rnd;
    for (int k = 0; k < kSegregationSplits; ++k)
        d_rnd.push_back(
            xdesign::assign_groups(names, homes, 100 + static_cast<std::uint64_t>(k), rnd).mean_between_distance);
    SplitTally t;
    for (double d : d_rnd) {
        t.beaten += d_seg > d;
        t.margin = std::min(t.margin, d_seg - d);
    }
    std::sort(d_rnd.begin(), d_rnd.end());
    t.rank95_ok = d_seg >= d_rnd[static_cast<std::size_t>(0.95 * (d_rnd.size() - 1))];
    return t;
}

Verdict segregation() {
    std::vector<xdesign::HomePoint> town;
    for (const auto& p : inputs().roster) town.push_back({p.home.x, p.home.y});
    const auto fixture = tally_splits(two_cluster_fixture(), false);
    const auto town_bal = tally_splits(town, false);
    const auto fixture_asym = tally_splits(two_cluster_fixture(), true);
    const auto town_asym = tally_splits(town, true);
    const int n = kSegregationSplits;
    const bool ok = fixture.beaten == n && town_bal.beaten == n && fixture_asym.rank95_ok && town_asym.rank95_ok;
    auto part = [n](const char* what, const SplitTally& t) {
        return std::string(what) + " beats " + std::to_string(t.beaten) + "/" + std::to_string(n) + " (margin " +
               fmt(t.margin) + ")";
    };
    return {ok, part("fixture 2-means split", fixture) + ", " + part("town 2-means split", town_bal) +
                    "; 20/5 minority split >= random p95: fixture " + (fixture_asym.rank95_ok ? "yes" : "no") +
                    " (beats " + std::to_string(fixture_asym.beaten) + "), town " +
                    (town_asym.rank95_ok ? "yes" : "no") + " (beats " + std::to_string(town_asym.beaten) + ")"};
}

Verdict probe_isolation() {
    auto& in = inputs();
    gateway::ScriptedGateway gw(in.profile);
    xdesign::ExperimentPlan plan;
    plan.cells = all_cells();
    plan.runs_per_cell = 2;
    plan.base_seed = 77;
    int runs = 0;
    std::size_t probes = 0, events = 0;
    for (const auto& run : xdesign::enumerate_runs(plan)) {
        const auto on = ctl::simulate_run(in.map, in.roster, run, kE2eHours, kE2eAgents, true, gw);
        const auto off = ctl::simulate_run(in.map, in.roster, run, kE2eHours, kE2eAgents, false, gw);
        if (on.events != off.events) return {false, run.run_id + ": event logs differ"};
        if (!off.probes.empty()) return {false, run.run_id + ": probes recorded while disabled"};
        probes += on.probes.size();
        events += on.events.size();
        ++runs;
    }
    return {probes > 0, std::to_string(runs) + " runs identical with probes on/off; " + std::to_string(events) +
                            " events, " + std::to_string(probes) + " probe records"};
}

Verdict mediation() {
    inferkit::MediationSpec s;
    s.treatments = {"treat"};
    s.mediator = "m";
    s.outcome = "y";
    s.exposure = "exposure";
    s.controls = {"ctrl"};
    test::MediationTruth full;
    full.c = 0.0;
    test::MediationTruth independent;
    independent.b = 0.0;
    independent.c = 0.3;
    int full_ok = 0, indep_ok = 0;
    for (int k = 0; k < kMediationSeeds; ++k) {
        const auto seed = static_cast<std::uint64_t>(k);
        const auto f = test::mediation_frame(7000 + seed, kMediationClusters, kMediationRows, full);
        const auto r = inferkit::mediation_boot(f, s, kMediationReplicates, seed, 1)[0];
        full_ok += !r.indirect_ci.covers(0.0) && r.direct_ci.covers(0.0);
        const auto g = test::mediation_frame(8000 + seed, kMediationClusters, kMediationRows, independent);
        indep_ok += inferkit::mediation_boot(g, s, kMediationReplicates, seed, 1)[0].indirect_ci.covers(0.0);
    }
    return {full_ok >= kMediationMin && indep_ok >= kMediationMin,
            "full mediation (indirect excludes 0, direct covers 0) in " + std::to_string(full_ok) + "/" +
                std::to_string(kMediationSeeds) + "; independent mediator (indirect covers 0) in " +
                std::to_string(indep_ok) + "/" + std::to_string(kMediationSeeds) + " (need " +
                std::to_string(kMediationMin) + ", " + std::to_string(kMediationReplicates) + " replicates)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"determinism", determinism},
        {"planted_direction", planted_direction},
        {"stats_oracles", stats_oracles},
        {"nb2_recovery", nb2_recovery},
        {"e2e_signs", e2e_signs},
        {"panel_conservation", panel_conservation},
        {"segregation", segregation},
        {"probe_isolation", probe_isolation},
        {"mediation", mediation},
    };
    CLI::App app{"igsim acceptance suite"};
    std::vector<std::string> only;
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << fmt(secs, 3) << " s]"
                  << std::endl;
        failed += !v.pass;
    }
    return failed ? 1 : 0;
}
