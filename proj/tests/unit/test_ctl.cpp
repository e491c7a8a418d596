#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <sys/stat.h>

#include "fixtures.hpp"
#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"
#include "igsim/ctl/manifest.hpp"
#include "igsim/ctl/models.hpp"
#include "igsim/ctl/runner.hpp"
#include "igsim/ctl/sidecar.hpp"
#include "igsim/ctl/svg.hpp"
#include "igsim/gateway/scripted.hpp"
#include "igsim/world/map.hpp"
#include "igsim/world/persona.hpp"
#include "oracles.hpp"

using namespace igsim;
using namespace igsim::ctl;

namespace {

class FailingAfter : public gateway::ModelGateway {
public:
    FailingAfter(gateway::ModelGateway& inner, int ok_calls) : inner_(inner), left_(ok_calls) {}
    std::string complete(const gateway::ChatRequest& req) override {
        if (left_-- <= 0) throw gateway::GatewayError("simulated outage", "req-9");
        return inner_.complete(req);
    }

private:
    gateway::ModelGateway& inner_;
    int left_;
};

SimPlan mini_plan() { return load_sim_plan(test::data_dir() / "plans" / "mini.json"); }

// Panel-shaped frame with NB2 counts from planted coefficients.
inferkit::Frame synthetic_panel(std::uint64_t seed, int runs, int hours) {
    std::mt19937_64 g(seed);
    std::uniform_int_distribution<int> ex(1, 8);
    std::uniform_real_distribution<double> u(0, 0.5);
    std::vector<std::string> id;
    std::vector<double> y, e, hr, cr, sym, real, tz;
    for (int r = 0; r < runs; ++r) {
        const double s = r % 2, re = (r / 2) % 2;
        for (int t = 0; t < hours; ++t) {
            id.push_back("cell" + std::to_string(r % 4) + "/" + std::to_string(r));
            const double h = u(g), c = u(g), z = (t - hours / 2.0) / hours;
            const double ev = ex(g);
            const double mu = ev * std::exp(-2.0 + 0.5 * h - 0.4 * c + 0.3 * s + 0.6 * re - 0.2 * s * re + 0.1 * z);
            id.back();
            y.push_back(static_cast<double>(test::nb2_draw(g, mu, 3.0)));
            e.push_back(ev);
            hr.push_back(h);
            cr.push_back(c);
            sym.push_back(s);
            real.push_back(re);
            tz.push_back(z);
        }
    }
    inferkit::Frame f;
    f.add_text("run_id", id);
    f.add_numeric("hostile_count", y);
    f.add_numeric("total_actions", e);
    f.add_numeric("hostile_rate_lag", hr);
    f.add_numeric("contact_rate_lag", cr);
    f.add_numeric("symbolic", sym);
    f.add_numeric("realistic", real);
    f.add_numeric("time_z", tz);
    return f;
}

std::filesystem::path write_script(const std::filesystem::path& dir, const std::string& body) {
    const auto path = dir / "fake_sidecar.sh";
    std::ofstream(path) << "#!/bin/sh\n" << body;
    ::chmod(path.c_str(), 0755);
    return path;
}

}  // namespace

TEST(Manifest, TransitionsAreMonotone) {
    RunManifest m;
    m.runs.push_back({"a/0", RunStatus::pending, "runs/a/0", ""});
    m.runs.push_back({"a/1", RunStatus::pending, "runs/a/1", ""});
    EXPECT_THROW(m.transition("a/0", RunStatus::done), ManifestError);
    m.transition("a/0", RunStatus::running);
    m.transition("a/0", RunStatus::done);
    EXPECT_THROW(m.transition("a/0", RunStatus::running), ManifestError);
    m.transition("a/1", RunStatus::running);
    m.transition("a/1", RunStatus::failed, "boom");
    EXPECT_EQ(m.find("a/1")->error, "boom");
    EXPECT_FALSE(m.all_done());
    m.reopen("a/1");
    EXPECT_EQ(m.find("a/1")->status, RunStatus::pending);
    m.reopen("a/0");
    EXPECT_EQ(m.find("a/0")->status, RunStatus::done);
    EXPECT_THROW(m.transition("zz", RunStatus::running), ManifestError);
}

TEST(Manifest, SaveLoadAndCorruption) {
    RunManifest m;
    m.plan_hash = "abc";
    m.runs.push_back({"a/0", RunStatus::failed, "runs/a/0", "x"});
    const auto dir = test::scratch_dir("manifest");
    save_manifest(dir / "manifest.json", m);
    const auto back = load_manifest(dir / "manifest.json");
    EXPECT_EQ(back.plan_hash, "abc");
    EXPECT_EQ(back.runs[0].status, RunStatus::failed);
    std::ofstream(dir / "bad.json") << "{\"plan_hash\": \"abc\", \"runs\": [";
    const auto before = read_file(dir / "bad.json");
    try {
        load_manifest(dir / "bad.json");
        FAIL();
    } catch (const ManifestError& e) {
        EXPECT_NE(std::string(e.what()).find("untouched"), std::string::npos);
    }
    EXPECT_EQ(read_file(dir / "bad.json"), before);
    std::ofstream(dir / "status.json") << R"({"plan_hash":"x","runs":[{"run_id":"a/0","status":"weird","dir":"d"}]})";
    EXPECT_THROW(load_manifest(dir / "status.json"), ManifestError);
}

TEST(Models, UnknownModelAndMissingColumn) {
    EXPECT_THROW(model_def("m9"), ConfigError);
    EXPECT_EQ(model_names().size(), 4u);
    auto f = synthetic_panel(1, 12, 10);
    inferkit::Frame g;
    for (const auto& c : f.columns()) {
        if (c == "total_actions") continue;
        if (f.is_text(c)) g.add_text(c, f.text(c));
        else g.add_numeric(c, f.numeric(c));
    }
    try {
        fit_model(g, "m1");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("total_actions"), std::string::npos);
    }
}

TEST(Models, M1RecoversPlantedSigns) {
    const auto r = fit_model(synthetic_panel(2, 80, 48), "m1");
    EXPECT_EQ(r.n_clusters, 80);
    EXPECT_NEAR(r.beta("realistic"), 0.6, 0.25);
    EXPECT_NEAR(r.beta("symbolic"), 0.3, 0.25);
    EXPECT_NEAR(r.beta("hostile_rate_lag"), 0.5, 0.4);
    ASSERT_TRUE(r.theta.has_value());
    const auto csv = to_csv(r);
    EXPECT_NE(csv.find("Realistic threat"), std::string::npos);
    EXPECT_EQ(to_json(r)["model"], "m1");
}

TEST(Runner, PlanPathsResolveAndHashTracksContents) {
    const auto p = mini_plan();
    EXPECT_TRUE(p.map.is_absolute());
    EXPECT_TRUE(std::filesystem::exists(p.profile));
    EXPECT_EQ(p.hours(), 6);
    EXPECT_EQ(plan_hash(p), plan_hash(mini_plan()));
    auto q = p;
    q.agents = 4;
    EXPECT_NE(plan_hash(q), plan_hash(p));
    const auto again = sim_plan_from_json(to_json(p), "/");
    EXPECT_EQ(plan_hash(again), plan_hash(p));
}

TEST(Runner, ResumeAfterGatewayFailureMatchesUninterruptedRun) {
    const auto plan = mini_plan();
    const auto map = world::WorldMap::load(plan.map);
    const auto roster = world::load_personas(plan.personas, map);
    const auto run = xdesign::enumerate_runs(plan.plan).back();
    gateway::ScriptedGateway gw(gateway::ScriptedProfile::load(plan.profile));

    const auto base = test::scratch_dir("resume");
    ASSERT_TRUE(run_to_disk(plan, map, roster, run, base / "clean", gw, false).ok);

    FailingAfter flaky(gw, 900);
    const auto first = run_to_disk(plan, map, roster, run, base / "broken", flaky, false);
    ASSERT_FALSE(first.ok);
    EXPECT_NE(first.error.find("req-9"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(base / "broken" / "checkpoint"));
    const auto second = run_to_disk(plan, map, roster, run, base / "broken", gw, true);
    ASSERT_TRUE(second.ok);
    EXPECT_TRUE(second.resumed);
    EXPECT_FALSE(std::filesystem::exists(base / "broken" / "checkpoint"));
    EXPECT_EQ(read_file(base / "broken" / "events.jsonl"), read_file(base / "clean" / "events.jsonl"));
    EXPECT_EQ(read_file(base / "broken" / "probes.jsonl"), read_file(base / "clean" / "probes.jsonl"));
}

TEST(Runner, InMemoryRunMatchesDisk) {
    const auto plan = mini_plan();
    const auto map = world::WorldMap::load(plan.map);
    const auto roster = world::load_personas(plan.personas, map);
    const auto run = xdesign::enumerate_runs(plan.plan)[1];
    gateway::ScriptedGateway gw(gateway::ScriptedProfile::load(plan.profile));
    const auto dir = test::scratch_dir("memdisk");
    ASSERT_TRUE(run_to_disk(plan, map, roster, run, dir, gw, false).ok);
    const auto trace = simulate_run(map, roster, run, plan.hours(), plan.agents, plan.probes, gw, plan.probe_scales);
    const auto disk = ledger::read_events(dir / "events.jsonl");
    EXPECT_EQ(trace.events, disk.events);
    EXPECT_EQ(trace.probes, ledger::read_probes(dir / "probes.jsonl").probes);
    const auto panel = panel_for_trace(trace, gw, 1);
    EXPECT_EQ(panel.size(), static_cast<std::size_t>(plan.agents * plan.hours()));
}

TEST(Sidecar, ExtractionJobRoundTripAndValidation) {
    ExtractionJob j;
    j.model = "some-model";
    j.inputs = {{"i1", "text one", "hostile"}, {"i2", "text two", "neutral"}};
    j.repeats = 5;
    j.output = "/tmp/out.actd";
    const auto js = to_json(j);
    EXPECT_EQ(js["kind"], "extract");
    EXPECT_EQ(js["mode"], "stochastic");
    const auto back = extraction_job_from_json(js);
    EXPECT_EQ(back.inputs.size(), 2u);
    EXPECT_EQ(back.inputs[1].label, "neutral");
    EXPECT_EQ(back.repeats, 5);
    EXPECT_EQ(back.output, j.output);
    auto bad = js;
    bad["repeats"] = 0;
    EXPECT_THROW(extraction_job_from_json(bad), ValidationError);
    bad = js;
    bad["inputs"] = nlohmann::json::array();
    EXPECT_THROW(extraction_job_from_json(bad), ValidationError);
    bad = js;
    bad["inputs"][0].erase("label");
    EXPECT_THROW(extraction_job_from_json(bad), Error);
}

TEST(Sidecar, SteeringJobValidation) {
    SteeringJob j;
    j.model = "m";
    j.prompts = {{"p1", "scenario", ""}};
    j.vectors = {"/tmp/v.json"};
    j.layers = {7, 9};
    j.output = "/tmp/gen.jsonl";
    const auto js = to_json(j);
    EXPECT_EQ(js["kind"], "steer");
    EXPECT_EQ(steering_job_from_json(js).layers, (std::vector<int>{7, 9}));
    auto bad = js;
    bad["alphas"] = {-2, 2};
    EXPECT_THROW(steering_job_from_json(bad), ValidationError);
    bad = js;
    bad["layers"] = nlohmann::json::array();
    EXPECT_THROW(steering_job_from_json(bad), ValidationError);
    bad = js;
    bad["generations"] = 0;
    EXPECT_THROW(steering_job_from_json(bad), ValidationError);
}

TEST(Sidecar, SubprocessWritesGenerationsThatGetRated) {
    const auto dir = test::scratch_dir("sidecar");
    SteeringJob j;
    j.model = "m";
    j.prompts = {{"p1", "A stranger bumps into you.", ""}};
    j.vectors = {dir / "v.json"};
    j.layers = {3};
    j.generations = 2;
    j.output = dir / "gen.jsonl";
    write_file_atomic(dir / "job.json", to_json(j).dump());
    const auto script = write_script(dir,
                                     "out=\"" + j.output.string() + "\"\n"
                                     "grep -q '\"kind\":\"steer\"' \"$1\" || exit 4\n"
                                     "for a in -2.0 0.0 2.0; do for s in 0 1; do\n"
                                     "  echo \"{\\\"prompt_id\\\":\\\"p1\\\",\\\"alpha\\\":$a,\\\"sample\\\":$s,"
                                     "\\\"text\\\":\\\"reply $a $s\\\"}\" >> \"$out\"\n"
                                     "done; done\n");
    EXPECT_EQ(run_sidecar({script.string()}, dir / "job.json").exit_code, 0);
    const auto gens = read_generations(j.output);
    ASSERT_EQ(gens.size(), 6u);
    EXPECT_EQ(gens[5].alpha, 2.0);
    EXPECT_EQ(gens[5].sample, 1);

    gateway::ScriptedProfile p;
    gateway::ScriptedRule rate;
    rate.reply = R"({"rating": 2, "behavior_type": "neutral", "is_hostile": false})";
    p.set(gateway::Purpose::rate_hostility, "default", rate);
    gateway::ScriptedGateway rater(p);
    const auto rated = rate_generations(gens, {{"p1", "A stranger bumps into you."}}, rater, 3);
    ASSERT_EQ(rated.size(), 6u);
    EXPECT_EQ(rated[0].rating, 2.0);
    write_ratings_jsonl(dir / "ratings.jsonl", rated);
    const auto lines = read_file(dir / "ratings.jsonl");
    EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 6);
    EXPECT_THROW(rate_generations(gens, {}, rater, 3), ValidationError);
}

TEST(Sidecar, ExitCodesAndMissingBinary) {
    const auto dir = test::scratch_dir("sidecar_rc");
    write_file_atomic(dir / "job.json", "{}");
    const auto script = write_script(dir, "exit 7\n");
    EXPECT_EQ(run_sidecar({script.string()}, dir / "job.json").exit_code, 7);
    const auto killer = dir / "kill.sh";
    std::ofstream(killer) << "#!/bin/sh\nkill -9 $$\n";
    ::chmod(killer.c_str(), 0755);
    EXPECT_EQ(run_sidecar({killer.string()}, dir / "job.json").exit_code, 128 + 9);
    EXPECT_THROW(run_sidecar({"/nonexistent/sidecar-binary"}, dir / "job.json"), ConfigError);
}

TEST(Sidecar, MalformedGenerationLineNamesLocation) {
    const auto dir = test::scratch_dir("gens_bad");
    std::ofstream(dir / "g.jsonl") << R"({"prompt_id":"p","alpha":0,"sample":0,"text":"x"})" << "\n"
                                   << R"({"prompt_id":"p","alpha":0,"text":"x"})" << "\n";
    try {
        read_generations(dir / "g.jsonl");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "sample");
        EXPECT_NE(std::string(e.what()).find("g.jsonl:2"), std::string::npos);
    }
}

TEST(Sidecar, HostilityFilterKeepsConsistentSamples) {
    const auto kept = filter_hostility_samples(
        {{"a", true, 4}, {"b", true, 2}, {"c", false, 1}, {"d", false, 3}, {"e", true, 3}});
    ASSERT_EQ(kept.size(), 3u);
    EXPECT_EQ(kept[0].id, "a");
    EXPECT_EQ(kept[1].id, "c");
    EXPECT_EQ(kept[2].id, "e");
}

TEST(Svg, LineChartWithGaps) {
    const auto svg = svg_line_chart("d by layer", "layer", "d",
                                    {{"cohen_d", {0, 1, 2, 3}, {0.1, std::nullopt, 2.0, 1.5}}});
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("d by layer"), std::string::npos);
    EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 0, true);
}
