#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"
#include "igsim/ctl/manifest.hpp"
#include "igsim/ctl/models.hpp"
#include "igsim/ctl/runner.hpp"
#include "igsim/ctl/sidecar.hpp"
#include "igsim/ctl/svg.hpp"
#include "igsim/gateway/remote.hpp"
#include "igsim/gateway/scripted.hpp"
#include "igsim/inferkit/frame.hpp"
#include "igsim/inferkit/mediation.hpp"
#include "igsim/inferkit/report.hpp"
#include "igsim/statespace/analysis.hpp"
#include "igsim/statespace/concept_vector.hpp"
#include "igsim/statespace/dump.hpp"
#include "igsim/statespace/steering.hpp"

namespace fs = std::filesystem;
using namespace igsim;

namespace {

void note(const std::string& m) { std::cerr << m << "\n"; }

struct BackendOpts {
    std::string backend = "scripted";
    std::string profile;
    std::string gateway_config;
};

void add_backend_flags(CLI::App* cmd, BackendOpts& b) {
    cmd->add_option("--backend", b.backend, "Model backend")->check(CLI::IsMember({"scripted", "remote"}));
    cmd->add_option("--profile", b.profile, "Scripted backend profile (JSON)");
    cmd->add_option("--gateway-config", b.gateway_config, "Remote backend config (key=value)");
}

ctl::GatewayFactory make_factory(const BackendOpts& b, const fs::path& fallback_profile = {}) {
    if (b.backend == "remote") {
        if (b.gateway_config.empty()) throw ConfigError("--backend remote needs --gateway-config");
        auto cfg = gateway::load_remote_config(b.gateway_config);
        return [cfg] { return std::make_unique<gateway::RemoteGateway>(cfg); };
    }
    const fs::path path = b.profile.empty() ? fallback_profile : fs::path(b.profile);
    if (path.empty()) throw ConfigError("scripted backend needs --profile (or a profile in the plan)");
    auto profile = gateway::ScriptedProfile::load(path);
    return [profile] { return std::make_unique<gateway::ScriptedGateway>(profile); };
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ','))
        if (!part.empty()) out.push_back(part);
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// sim ----------------------------------------------------------------------

struct SimRunArgs {
    std::string plan, out;
    BackendOpts backend;
    bool resume = false;
    unsigned jobs = 1;
};

int cmd_sim_run(const SimRunArgs& a) {
    const auto plan = ctl::load_sim_plan(a.plan);
    auto factory = make_factory(a.backend, plan.profile);
    ctl::SimOptions opts;
    opts.resume = a.resume;
    opts.jobs = a.jobs;
    opts.log = note;
    const auto s = ctl::run_plan(plan, a.out, factory, opts);
    if (!s.noop) note(std::to_string(s.done) + " done, " + std::to_string(s.failed) + " failed");
    if (s.failed > 0) {
        note("some runs failed; rerun with --resume to continue them from their checkpoints");
        return 3;
    }
    return 0;
}

struct SimDeriveArgs {
    std::string sim, out;
    BackendOpts backend;
    std::uint64_t seed = 0;
    bool all_events = false;
};

int cmd_sim_derive(const SimDeriveArgs& a) {
    fs::path fallback;
    if (a.backend.profile.empty() && a.backend.backend == "scripted") {
        const auto cfg_plan = fs::path(a.sim) / "plan.json";
        if (fs::exists(cfg_plan)) fallback = ctl::sim_plan_from_json(load_json(cfg_plan), fs::path(a.sim)).profile;
    }
    auto gw = make_factory(a.backend, fallback)();
    ctl::DeriveOptions opts;
    opts.seed = a.seed;
    opts.panel.social_only = !a.all_events;
    opts.log = note;
    const auto s = ctl::derive_panels(a.sim, a.out, *gw, opts);
    if (!s.complete) {
        note("annotation incomplete: " + s.error);
        note("rerun the same command to continue from the saved partial annotation");
        return 3;
    }
    note(std::to_string(s.runs) + " runs, " + std::to_string(s.rows) + " panel rows -> " +
         (fs::path(a.out) / "panel.csv").string());
    return 0;
}

struct SimFitArgs {
    std::string model, panel, out;
};

int cmd_sim_fit(const SimFitArgs& a) {
    const auto frame = inferkit::Frame::read_csv(a.panel);
    const auto report = ctl::fit_model(frame, a.model);
    const fs::path prefix = a.out.empty() ? fs::path(a.panel).parent_path() / ("fit_" + a.model) : fs::path(a.out);
    if (!prefix.parent_path().empty()) fs::create_directories(prefix.parent_path());
    write_file_atomic(prefix.string() + ".json", ctl::to_json(report).dump(2) + "\n");
    write_file_atomic(prefix.string() + ".csv", ctl::to_csv(report));
    std::cout << report.title << " (n=" << report.n << ", clusters=" << report.n_clusters << ")\n";
    std::cout << ctl::to_csv(report);
    for (const auto& w : report.warnings) note("warning: " + w);
    return 0;
}

struct SimMediateArgs {
    std::string panel, out;
    std::string treatments = "symbolic,realistic";
    std::string mediator = "bias_lag";
    std::string outcome = "hostile_count";
    std::string exposure = "total_actions";
    std::string controls = "hostile_rate_lag,contact_rate_lag,time_z";
    int replicates = 2000;
    std::uint64_t seed = 0;
};

int cmd_sim_mediate(const SimMediateArgs& a) {
    const auto frame = inferkit::Frame::read_csv(a.panel);
    inferkit::MediationSpec spec;
    spec.treatments = split_csv(a.treatments);
    spec.mediator = a.mediator;
    spec.outcome = a.outcome;
    if (!a.exposure.empty()) spec.exposure = a.exposure;
    spec.controls = split_csv(a.controls);
    const auto res = inferkit::mediation_boot(frame, spec, a.replicates, a.seed);
    auto rows = nlohmann::json::array();
    std::ostringstream csv;
    csv << "treatment,a,b,indirect,indirect_lo,indirect_hi,direct,direct_lo,direct_hi,replicates,failed\n";
    for (const auto& r : res) {
        rows.push_back({{"treatment", r.treatment},
                        {"a", r.a},
                        {"b", r.b},
                        {"indirect", r.indirect},
                        {"indirect_ci", {r.indirect_ci.lower, r.indirect_ci.upper}},
                        {"direct", r.direct},
                        {"direct_ci", {r.direct_ci.lower, r.direct_ci.upper}},
                        {"a_ci", {r.a_ci.lower, r.a_ci.upper}},
                        {"b_ci", {r.b_ci.lower, r.b_ci.upper}},
                        {"replicates", r.replicates},
                        {"failed", r.failed}});
        csv << r.treatment << ',' << fmt(r.a) << ',' << fmt(r.b) << ',' << fmt(r.indirect) << ','
            << fmt(r.indirect_ci.lower) << ',' << fmt(r.indirect_ci.upper) << ',' << fmt(r.direct) << ','
            << fmt(r.direct_ci.lower) << ',' << fmt(r.direct_ci.upper) << ',' << r.replicates << ',' << r.failed
            << "\n";
    }
    const fs::path prefix = a.out.empty() ? fs::path(a.panel).parent_path() / "mediation" : fs::path(a.out);
    if (!prefix.parent_path().empty()) fs::create_directories(prefix.parent_path());
    write_file_atomic(prefix.string() + ".json", rows.dump(2) + "\n");
    write_file_atomic(prefix.string() + ".csv", csv.str());
    std::cout << csv.str();
    return 0;
}

// vectors ------------------------------------------------------------------

struct ExtractArgs {
    std::string dump, a, b, name, out;
    std::size_t layer = 0;
};

int cmd_vec_extract(const ExtractArgs& x) {
    const auto dump = statespace::read_dump(x.dump);
    const auto v = statespace::mean_diff_vector(dump, x.a, x.b, x.layer, x.name.empty() ? x.a + "_vs_" + x.b : x.name);
    statespace::write_vector(x.out, v);
    note("vector '" + v.name + "' at layer " + std::to_string(v.layer) + " -> " + x.out);
    return 0;
}

struct ProjectArgs {
    std::string dump, vector, out;
    bool center = false;
};

int cmd_vec_project(const ProjectArgs& x) {
    const auto dump = statespace::read_dump(x.dump);
    const auto v = statespace::read_vector(x.vector);
    const auto p = statespace::project(dump, v, {x.center});
    std::ostringstream csv;
    csv << "input,input_sha256,label,score\n";
    for (std::size_t i = 0; i < p.scores.size(); ++i)
        csv << i << ',' << dump.input_sha256()[i] << ',' << p.labels[i] << ',' << fmt(p.scores[i]) << "\n";
    write_file_atomic(x.out, csv.str());
    note(std::to_string(p.scores.size()) + " projections -> " + x.out);
    return 0;
}

struct SweepArgs {
    std::string dump, heldout, a, b, out;
    std::size_t top_k = 5;
};

int cmd_vec_sweep(const SweepArgs& x) {
    const auto dump = statespace::read_dump(x.dump);
    const auto held = statespace::read_dump(x.heldout);
    const auto sweep = statespace::layer_sweep(dump, x.a, x.b, held);
    fs::create_directories(x.out);
    const fs::path out(x.out);
    std::ostringstream csv;
    csv << "layer,cohen_d,wasserstein,mean_diff\n";
    ctl::Series d{"Cohen's d", {}, {}}, w{"Wasserstein", {}, {}};
    auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (const auto& r : sweep.rows) {
        csv << r.layer << ',' << cell(r.cohen_d) << ',' << cell(r.wasserstein) << ',' << cell(r.mean_diff) << "\n";
        d.x.push_back(static_cast<double>(r.layer));
        d.y.push_back(r.cohen_d);
        w.x.push_back(static_cast<double>(r.layer));
        w.y.push_back(r.wasserstein);
    }
    write_file_atomic(out / "sweep.csv", csv.str());
    const auto title = x.a + " vs " + x.b;
    write_file_atomic(out / "sweep_cohen_d.svg", ctl::svg_line_chart(title, "Layer", "Cohen's d", {d}));
    write_file_atomic(out / "sweep_wasserstein.svg", ctl::svg_line_chart(title, "Layer", "Wasserstein D", {w}));
    const auto layers = statespace::select_steering_layers(sweep, x.top_k);
    write_file_atomic(out / "steering_layers.json", nlohmann::json{{"layers", layers}, {"k", x.top_k}}.dump() + "\n");
    note(std::to_string(sweep.rows.size()) + " layers -> " + (out / "sweep.csv").string());
    return 0;
}

std::pair<std::string, std::string> split_pair(const std::string& s, char sep) {
    const auto k = s.find(sep);
    if (k == std::string::npos || k == 0 || k + 1 == s.size())
        throw ValidationError("expected '<a>" + std::string(1, sep) + "<b>', got '" + s + "'");
    return {s.substr(0, k), s.substr(k + 1)};
}

struct ContrastArgs {
    std::string dump, out;
    std::vector<std::string> vectors;  // path or name=path
    std::vector<std::string> pairs = {"no:symbolic", "no:realistic", "no:both", "symbolic:realistic"};
    std::size_t n_perm = 10000;
    std::uint64_t seed = 0;
    bool center = false;
};

int cmd_vec_contrast(const ContrastArgs& x) {
    const auto dump = statespace::read_dump(x.dump);
    std::vector<statespace::ConceptVector> vecs;
    for (const auto& spec : x.vectors) {
        const auto eq = spec.find('=');
        auto v = statespace::read_vector(eq == std::string::npos ? spec : spec.substr(eq + 1));
        if (eq != std::string::npos) v.name = spec.substr(0, eq);
        vecs.push_back(std::move(v));
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& p : x.pairs) pairs.push_back(split_pair(p, ':'));
    statespace::ContrastOptions opts;
    opts.n_perm = x.n_perm;
    opts.seed = x.seed;
    opts.project.center = x.center;
    const auto rep = statespace::contrast_report(dump, vecs, pairs, opts);

    fs::create_directories(x.out);
    const fs::path out(x.out);
    std::ostringstream rows, desc;
    rows << "vector,layer,pair,n_a,n_b,t,df,p,cohen_d,mean_diff,D,p_D\n";
    auto json_rows = nlohmann::json::array();
    for (const auto& r : rep.rows) {
        const auto& s = r.stats;
        const auto pair = r.label_a + " vs " + r.label_b;
        rows << r.vector << ',' << r.layer << ',' << pair << ',' << r.n_a << ',' << r.n_b << ',' << fmt(s.t) << ','
             << fmt(s.df) << ',' << inferkit::format_p(s.p) << ',' << fmt(s.cohen_d) << ',' << fmt(s.mean_diff)
             << ',' << fmt(s.wasserstein) << ',' << inferkit::format_p(s.p_wasserstein) << "\n";
        json_rows.push_back({{"vector", r.vector}, {"layer", r.layer}, {"label_a", r.label_a},
                             {"label_b", r.label_b}, {"n_a", r.n_a}, {"n_b", r.n_b}, {"t", s.t}, {"df", s.df},
                             {"p", s.p}, {"cohen_d", s.cohen_d}, {"mean_diff", s.mean_diff}, {"D", s.wasserstein},
                             {"p_D", s.p_wasserstein}});
    }
    desc << "vector,label,n,mean,sd\n";
    auto json_desc = nlohmann::json::array();
    for (const auto& d : rep.descriptives) {
        desc << d.vector << ',' << d.label << ',' << d.projection.n << ',' << fmt(d.projection.mean) << ','
             << fmt(d.projection.sd) << "\n";
        json_desc.push_back({{"vector", d.vector}, {"label", d.label}, {"n", d.projection.n},
                             {"mean", d.projection.mean}, {"sd", d.projection.sd}});
    }
    write_file_atomic(out / "contrasts.csv", rows.str());
    write_file_atomic(out / "descriptives.csv", desc.str());
    write_file_atomic(out / "contrast_report.json",
                      nlohmann::json{{"contrasts", json_rows}, {"descriptives", json_desc}}.dump(2) + "\n");
    std::cout << desc.str() << "\n" << rows.str();
    return 0;
}

struct SteerReportArgs {
    std::string ratings, out, state = "hostility";
    std::vector<double> alphas = {-2.0, 0.0, 2.0};
    std::vector<std::string> contrasts = {"2:0", "2:-2"};
};

int cmd_vec_steer_report(const SteerReportArgs& x) {
    const auto ratings = statespace::read_ratings_jsonl(x.ratings);
    statespace::SteeringReportOptions opts;
    opts.state = x.state;
    opts.alpha_grid = x.alphas;
    opts.contrasts.clear();
    for (const auto& c : x.contrasts) {
        const auto [a, b] = split_pair(c, ':');
        opts.contrasts.emplace_back(std::stod(a), std::stod(b));
    }
    const auto t = statespace::steering_report(ratings, opts);
    fs::create_directories(x.out);
    const fs::path out(x.out);
    std::ostringstream desc, con;
    desc << "state,alpha,n,mean,sd,ci_lower,ci_upper,M (SD)\n";
    auto jd = nlohmann::json::array(), jc = nlohmann::json::array();
    ctl::Series means{t.state, {}, {}};
    for (const auto& r : t.rows) {
        std::ostringstream msd;
        msd.setf(std::ios::fixed);
        msd.precision(2);
        msd << r.mean << " (" << r.sd << ")";
        desc << t.state << ',' << fmt(r.alpha) << ',' << r.n << ',' << fmt(r.mean) << ',' << fmt(r.sd) << ','
             << fmt(r.ci.lower) << ',' << fmt(r.ci.upper) << ',' << msd.str() << "\n";
        jd.push_back({{"alpha", r.alpha}, {"n", r.n}, {"mean", r.mean}, {"sd", r.sd},
                      {"ci", {r.ci.lower, r.ci.upper}}});
        means.x.push_back(r.alpha);
        means.y.push_back(r.mean);
    }
    con << "state,contrast,t,df,p,cohen_d,mean_diff\n";
    for (const auto& c : t.contrasts) {
        con << t.state << ',' << fmt(c.alpha_a) << " vs " << fmt(c.alpha_b) << ',' << fmt(c.t) << ',' << fmt(c.df)
            << ',' << inferkit::format_p(c.p) << ',' << fmt(c.cohen_d) << ',' << fmt(c.mean_diff) << "\n";
        jc.push_back({{"alpha_a", c.alpha_a}, {"alpha_b", c.alpha_b}, {"t", c.t}, {"df", c.df}, {"p", c.p},
                      {"cohen_d", c.cohen_d}, {"mean_diff", c.mean_diff}});
    }
    write_file_atomic(out / "steering_descriptives.csv", desc.str());
    write_file_atomic(out / "steering_contrasts.csv", con.str());
    write_file_atomic(out / "steering_report.json",
                      nlohmann::json{{"state", t.state}, {"rows", jd}, {"contrasts", jc}}.dump(2) + "\n");
    write_file_atomic(out / "steering_means.svg",
                      ctl::svg_line_chart("Mean hostility rating by steering strength", "alpha", "Mean rating (1-5)",
                                          {means}));
    std::cout << desc.str() << "\n" << con.str();
    return 0;
}

struct MakeJobArgs {
    std::string kind, model, inputs, output, job;
    int repeats = 10;
    bool deterministic = false;
    std::vector<std::string> vectors;
    std::vector<double> alphas = {-2.0, 0.0, 2.0};
    std::vector<int> layers;
    std::string layers_file;
    int generations = 10;
    std::uint64_t seed = 0;
    double temperature = 0.7;
    int max_tokens = 256;
};

int cmd_vec_make_job(const MakeJobArgs& x) {
    const auto inputs = ctl::inputs_from_json(load_json(x.inputs));
    auto decoding = gateway::DecodingParams::generative(x.seed);
    decoding.temperature = x.temperature;
    decoding.max_tokens = x.max_tokens;
    nlohmann::json j;
    if (x.kind == "extract") {
        ctl::ExtractionJob job;
        job.model = x.model;
        job.inputs = inputs;
        job.repeats = x.repeats;
        job.deterministic = x.deterministic;
        job.decoding = decoding;
        job.output = x.output;
        j = ctl::to_json(job);
    } else {
        ctl::SteeringJob job;
        job.model = x.model;
        job.prompts = inputs;
        for (const auto& v : x.vectors) job.vectors.emplace_back(v);
        job.alphas = x.alphas;
        job.layers = x.layers;
        if (!x.layers_file.empty()) job.layers = load_json(x.layers_file).at("layers").get<std::vector<int>>();
        job.generations = x.generations;
        job.decoding = decoding;
        job.output = x.output;
        j = ctl::to_json(job);
    }
    write_file_atomic(x.job, j.dump(2) + "\n");
    note(x.kind + " job -> " + x.job);
    return 0;
}

struct RunSidecarArgs {
    std::string job, command;
};

int cmd_vec_run_sidecar(const RunSidecarArgs& x) {
    std::string cmd = x.command;
    if (cmd.empty()) {
        const char* env = std::getenv("IGSIM_SIDECAR");
        cmd = env ? env : "igsim-sidecar";
    }
    // Validate before launching so a bad job fails here, not inside the child.
    const auto j = load_json(x.job);
    if (j.value("kind", "") == "extract") ctl::extraction_job_from_json(j);
    else ctl::steering_job_from_json(j);
    std::vector<std::string> argv;
    std::istringstream ss(cmd);
    for (std::string w; ss >> w;) argv.push_back(w);
    const auto r = ctl::run_sidecar(argv, x.job);
    if (r.exit_code != 0) note("sidecar exited with status " + std::to_string(r.exit_code));
    return r.exit_code == 0 ? 0 : 3;
}

struct RateArgs {
    std::string generations, scenarios, out;
    BackendOpts backend;
    std::uint64_t seed = 0;
};

int cmd_vec_rate(const RateArgs& x) {
    const auto gens = ctl::read_generations(x.generations);
    std::map<std::string, std::string> scenarios;
    for (const auto& in : ctl::inputs_from_json(load_json(x.scenarios))) scenarios[in.id] = in.text;
    auto gw = make_factory(x.backend)();
    const auto rated = ctl::rate_generations(gens, scenarios, *gw, x.seed);
    ctl::write_ratings_jsonl(x.out, rated);
    note(std::to_string(rated.size()) + " ratings -> " + x.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intergroup threat simulation and concept-vector toolkit"};
    app.require_subcommand(1);
    std::function<int()> action;

    auto* sim = app.add_subcommand("sim", "Agent simulation experiments")->require_subcommand(1);

    SimRunArgs run;
    auto* c_run = sim->add_subcommand("run", "Execute every run of a plan");
    c_run->add_option("--plan", run.plan, "Plan JSON")->required()->check(CLI::ExistingFile);
    c_run->add_option("--out", run.out, "Output directory")->required();
    add_backend_flags(c_run, run.backend);
    c_run->add_flag("--resume", run.resume, "Restart failed runs from their checkpoints");
    c_run->add_option("--jobs", run.jobs, "Runs in parallel")->check(CLI::Range(1u, 256u));
    c_run->callback([&] { action = [&] { return cmd_sim_run(run); }; });

    SimDeriveArgs der;
    auto* c_der = sim->add_subcommand("derive", "Annotate events and build the hourly panels");
    c_der->add_option("--sim", der.sim, "Directory written by sim run")->required()->check(CLI::ExistingDirectory);
    c_der->add_option("--out", der.out, "Output directory")->required();
    add_backend_flags(c_der, der.backend);
    c_der->add_option("--seed", der.seed, "Classifier seed");
    c_der->add_flag("--all-events", der.all_events, "Count solo activities in total_actions");
    c_der->callback([&] { action = [&] { return cmd_sim_derive(der); }; });

    SimFitArgs fit;
    auto* c_fit = sim->add_subcommand("fit", "Fit a panel model and write its coefficient table");
    c_fit->add_option("--model", fit.model, "Model name")->required()->check(CLI::IsMember(ctl::model_names()));
    c_fit->add_option("--panel", fit.panel, "Panel CSV")->required()->check(CLI::ExistingFile);
    c_fit->add_option("--out", fit.out, "Output prefix (.json and .csv are appended)");
    c_fit->callback([&] { action = [&] { return cmd_sim_fit(fit); }; });

    SimMediateArgs med;
    auto* c_med = sim->add_subcommand("mediate", "Threat-to-hostility mediation with run-level bootstrap CIs");
    c_med->add_option("--panel", med.panel, "Panel CSV")->required()->check(CLI::ExistingFile);
    c_med->add_option("--treatments", med.treatments, "Comma-separated treatment columns")->capture_default_str();
    c_med->add_option("--mediator", med.mediator, "Mediator column")->capture_default_str();
    c_med->add_option("--outcome", med.outcome, "Count outcome column")->capture_default_str();
    c_med->add_option("--exposure", med.exposure, "Offset base column ('' for none)")->capture_default_str();
    c_med->add_option("--controls", med.controls, "Comma-separated control columns")->capture_default_str();
    c_med->add_option("--replicates", med.replicates, "Bootstrap replicates")->capture_default_str()->check(CLI::PositiveNumber);
    c_med->add_option("--seed", med.seed, "Bootstrap seed");
    c_med->add_option("--out", med.out, "Output prefix");
    c_med->callback([&] { action = [&] { return cmd_sim_mediate(med); }; });

    auto* vec = app.add_subcommand("vectors", "Concept-vector pipelines over activation dumps")->require_subcommand(1);

    ExtractArgs ex;
    auto* c_ex = vec->add_subcommand("extract", "Difference-of-means vector at one layer");
    c_ex->add_option("--dump", ex.dump, "Activation dump")->required()->check(CLI::ExistingFile);
    c_ex->add_option("--a", ex.a, "Label of set A")->required();
    c_ex->add_option("--b", ex.b, "Label of set B")->required();
    c_ex->add_option("--layer", ex.layer, "Layer")->required();
    c_ex->add_option("--name", ex.name, "Vector name");
    c_ex->add_option("--out", ex.out, "Vector JSON")->required();
    c_ex->callback([&] { action = [&] { return cmd_vec_extract(ex); }; });

    ProjectArgs pr;
    auto* c_pr = vec->add_subcommand("project", "Projection scores of every input");
    c_pr->add_option("--dump", pr.dump, "Activation dump")->required()->check(CLI::ExistingFile);
    c_pr->add_option("--vector", pr.vector, "Vector JSON")->required()->check(CLI::ExistingFile);
    c_pr->add_option("--out", pr.out, "Scores CSV")->required();
    c_pr->add_flag("--center", pr.center, "Subtract the layer mean before projecting");
    c_pr->callback([&] { action = [&] { return cmd_vec_project(pr); }; });

    SweepArgs sw;
    auto* c_sw = vec->add_subcommand("sweep", "Layer-wise separability on held-out inputs");
    c_sw->add_option("--dump", sw.dump, "Extraction dump")->required()->check(CLI::ExistingFile);
    c_sw->add_option("--heldout", sw.heldout, "Held-out dump")->required()->check(CLI::ExistingFile);
    c_sw->add_option("--a", sw.a, "Label of set A")->required();
    c_sw->add_option("--b", sw.b, "Label of set B")->required();
    c_sw->add_option("--top-k", sw.top_k, "Steering layers to select")->capture_default_str();
    c_sw->add_option("--out", sw.out, "Output directory")->required();
    c_sw->callback([&] { action = [&] { return cmd_vec_sweep(sw); }; });

    ContrastArgs co;
    auto* c_co = vec->add_subcommand("contrast", "Condition contrasts of projections");
    c_co->add_option("--dump", co.dump, "Dump of manipulation statements")->required()->check(CLI::ExistingFile);
    c_co->add_option("--vector", co.vectors, "Vector JSON, optionally name=path (repeatable)")->required();
    c_co->add_option("--pair", co.pairs, "Label pair a:b (repeatable)")->capture_default_str();
    c_co->add_option("--perm", co.n_perm, "Permutations for the Wasserstein p")->capture_default_str();
    c_co->add_option("--seed", co.seed, "Permutation seed");
    c_co->add_flag("--center", co.center, "Subtract the layer mean before projecting");
    c_co->add_option("--out", co.out, "Output directory")->required();
    c_co->callback([&] { action = [&] { return cmd_vec_contrast(co); }; });

    SteerReportArgs sr;
    auto* c_sr = vec->add_subcommand("steer-report", "Hostility ratings by steering strength");
    c_sr->add_option("--ratings", sr.ratings, "Ratings JSONL")->required()->check(CLI::ExistingFile);
    c_sr->add_option("--state", sr.state, "Steered state name")->capture_default_str();
    c_sr->add_option("--alpha", sr.alphas, "Alpha grid")->capture_default_str();
    c_sr->add_option("--contrast", sr.contrasts, "Alpha pair a:b (repeatable)")->capture_default_str();
    c_sr->add_option("--out", sr.out, "Output directory")->required();
    c_sr->callback([&] { action = [&] { return cmd_vec_steer_report(sr); }; });

    MakeJobArgs mj;
    auto* c_mj = vec->add_subcommand("make-job", "Write a sidecar job file");
    c_mj->add_option("kind", mj.kind, "extract or steer")->required()->check(CLI::IsMember({"extract", "steer"}));
    c_mj->add_option("--model", mj.model, "Model id")->required();
    c_mj->add_option("--inputs", mj.inputs, "JSON list of {id, text, label}")->required()->check(CLI::ExistingFile);
    c_mj->add_option("--output", mj.output, "Dump or generations path the sidecar writes")->required();
    c_mj->add_option("--job", mj.job, "Job file to write")->required();
    c_mj->add_option("--repeats", mj.repeats, "Forward passes per input")->capture_default_str()->check(CLI::PositiveNumber);
    c_mj->add_flag("--deterministic", mj.deterministic, "Greedy repeats");
    c_mj->add_option("--vector", mj.vectors, "Vector JSON (steer)");
    c_mj->add_option("--alpha", mj.alphas, "Alpha grid (steer)")->capture_default_str();
    c_mj->add_option("--layer", mj.layers, "Injection layers (steer)");
    c_mj->add_option("--layers-file", mj.layers_file, "steering_layers.json from sweep");
    c_mj->add_option("--generations", mj.generations, "Samples per prompt and alpha")->capture_default_str();
    c_mj->add_option("--seed", mj.seed, "Decoding seed");
    c_mj->add_option("--temperature", mj.temperature, "Decoding temperature")->capture_default_str();
    c_mj->add_option("--max-tokens", mj.max_tokens, "Decoding length")->capture_default_str();
    c_mj->callback([&] { action = [&] { return cmd_vec_make_job(mj); }; });

    RunSidecarArgs rs;
    auto* c_rs = vec->add_subcommand("run-sidecar", "Run the model sidecar on a job file");
    c_rs->add_option("--job", rs.job, "Job JSON")->required()->check(CLI::ExistingFile);
    c_rs->add_option("--command", rs.command, "Sidecar command line (default $IGSIM_SIDECAR or igsim-sidecar)");
    c_rs->callback([&] { action = [&] { return cmd_vec_run_sidecar(rs); }; });

    RateArgs ra;
    auto* c_ra = vec->add_subcommand("rate", "Rate steered generations for hostility");
    c_ra->add_option("--generations", ra.generations, "Generations JSONL")->required()->check(CLI::ExistingFile);
    c_ra->add_option("--scenarios", ra.scenarios, "JSON list of {id, text}")->required()->check(CLI::ExistingFile);
    add_backend_flags(c_ra, ra.backend);
    c_ra->add_option("--seed", ra.seed, "Rater seed");
    c_ra->add_option("--out", ra.out, "Ratings JSONL")->required();
    c_ra->callback([&] { action = [&] { return cmd_vec_rate(ra); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return action();
    } catch (const ctl::ManifestError& e) {
        std::cerr << "igsim: manifest error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "igsim: " << e.what() << "\n";
        return 1;
    }
}
