#include "igsim/ctl/sidecar.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <spawn.h>
#include <sys/wait.h>

#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"
#include "igsim/common/rng.hpp"
#include "igsim/gateway/programs.hpp"

extern char** environ;

namespace igsim::ctl {

namespace {

nlohmann::json decoding_json(const gateway::DecodingParams& d) {
    return {{"temperature", d.temperature}, {"top_p", d.top_p}, {"top_k", d.top_k},
            {"max_tokens", d.max_tokens},   {"seed", d.seed}};
}

gateway::DecodingParams decoding_from(const nlohmann::json& j) {
    gateway::DecodingParams d;
    if (!j.is_object()) return d;
    d.temperature = j.value("temperature", d.temperature);
    d.top_p = j.value("top_p", d.top_p);
    d.top_k = j.value("top_k", d.top_k);
    d.max_tokens = j.value("max_tokens", d.max_tokens);
    d.seed = j.value("seed", d.seed);
    return d;
}

nlohmann::json inputs_json(const std::vector<JobInput>& in, bool with_label) {
    auto a = nlohmann::json::array();
    for (const auto& i : in) {
        nlohmann::json e = {{"id", i.id}, {"text", i.text}};
        if (with_label) e["label"] = i.label;
        a.push_back(std::move(e));
    }
    return a;
}

void validate(const ExtractionJob& j) {
    if (j.model.empty()) throw ValidationError("extraction job: model is required");
    if (j.inputs.empty()) throw ValidationError("extraction job: inputs must be non-empty");
    if (j.repeats < 1) throw ValidationError("extraction job: repeats must be >= 1");
    if (j.output.empty()) throw ValidationError("extraction job: output path is required");
    for (const auto& i : j.inputs)
        if (i.id.empty() || i.text.empty() || i.label.empty())
            throw ValidationError("extraction job: every input needs id, text and label");
}

void validate(const SteeringJob& j) {
    if (j.model.empty()) throw ValidationError("steering job: model is required");
    if (j.prompts.empty()) throw ValidationError("steering job: prompts must be non-empty");
    if (j.vectors.empty()) throw ValidationError("steering job: at least one vector file is required");
    if (j.layers.empty()) throw ValidationError("steering job: at least one layer is required");
    if (std::find(j.alphas.begin(), j.alphas.end(), 0.0) == j.alphas.end())
        throw ValidationError("steering job: alpha grid must contain 0 (baseline)");
    if (j.generations < 1) throw ValidationError("steering job: generations must be >= 1");
    if (j.output.empty()) throw ValidationError("steering job: output path is required");
    for (int l : j.layers)
        if (l < 0) throw ValidationError("steering job: layers must be non-negative");
}

}  // namespace

std::vector<JobInput> inputs_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw SchemaError("inputs", "inputs must be a JSON list");
    std::vector<JobInput> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto where = "inputs[" + std::to_string(k) + "]";
        out.push_back({require<std::string>(j[k], "id", where), require<std::string>(j[k], "text", where),
                       j[k].value("label", std::string())});
    }
    return out;
}

nlohmann::json to_json(const ExtractionJob& j) {
    validate(j);
    return {{"kind", "extract"},
            {"model", j.model},
            {"inputs", inputs_json(j.inputs, true)},
            {"repeats", j.repeats},
            {"mode", j.deterministic ? "deterministic" : "stochastic"},
            {"decoding", decoding_json(j.decoding)},
            {"output", j.output.string()}};
}

nlohmann::json to_json(const SteeringJob& j) {
    validate(j);
    nlohmann::json vecs = nlohmann::json::array();
    for (const auto& v : j.vectors) vecs.push_back(v.string());
    return {{"kind", "steer"},         {"model", j.model},       {"prompts", inputs_json(j.prompts, false)},
            {"vectors", vecs},         {"alphas", j.alphas},     {"layers", j.layers},
            {"generations", j.generations}, {"decoding", decoding_json(j.decoding)}, {"output", j.output.string()}};
}

ExtractionJob extraction_job_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "extract") throw SchemaError("kind", "not an extraction job");
    ExtractionJob out;
    out.model = require<std::string>(j, "model", "extraction job");
    out.inputs = inputs_from_json(j.at("inputs"));
    out.repeats = j.value("repeats", 10);
    out.deterministic = j.value("mode", "stochastic") == "deterministic";
    if (j.contains("decoding")) out.decoding = decoding_from(j["decoding"]);
    out.output = require<std::string>(j, "output", "extraction job");
    validate(out);
    return out;
}

SteeringJob steering_job_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "steer") throw SchemaError("kind", "not a steering job");
    SteeringJob out;
    out.model = require<std::string>(j, "model", "steering job");
    out.prompts = inputs_from_json(j.at("prompts"));
    for (const auto& v : require<std::vector<std::string>>(j, "vectors", "steering job")) out.vectors.emplace_back(v);
    if (j.contains("alphas")) out.alphas = j["alphas"].get<std::vector<double>>();
    out.layers = j.at("layers").get<std::vector<int>>();
    out.generations = j.value("generations", 10);
    if (j.contains("decoding")) out.decoding = decoding_from(j["decoding"]);
    out.output = require<std::string>(j, "output", "steering job");
    validate(out);
    return out;
}

SidecarResult run_sidecar(const std::vector<std::string>& command, const std::filesystem::path& job_path) {
    if (command.empty()) throw ConfigError("sidecar command is empty");
    std::vector<std::string> args = command;
    args.push_back(job_path.string());
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (const int rc = posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ); rc != 0)
        throw ConfigError("cannot start sidecar '" + command[0] + "': " + std::strerror(rc));
    int status = 0;
    if (waitpid(pid, &status, 0) < 0) throw Error("waiting for sidecar failed");
    SidecarResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    return r;
}

std::vector<Generation> read_generations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open generations file " + path.string());
    std::vector<Generation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto where = path.string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("line", where + ": " + e.what());
        }
        out.push_back({require<std::string>(j, "prompt_id", where), require<double>(j, "alpha", where),
                       require<int>(j, "sample", where), require<std::string>(j, "text", where)});
    }
    return out;
}

std::vector<RatedGeneration> rate_generations(const std::vector<Generation>& gens,
                                              const std::map<std::string, std::string>& scenarios,
                                              gateway::ModelGateway& rater, std::uint64_t seed) {
    std::vector<RatedGeneration> out;
    for (const auto& g : gens) {
        auto it = scenarios.find(g.prompt_id);
        if (it == scenarios.end()) throw ValidationError("no scenario for prompt id '" + g.prompt_id + "'");
        const auto key = mix_seed({seed, fnv1a64(g.prompt_id), static_cast<std::uint64_t>(g.sample),
                                   static_cast<std::uint64_t>(static_cast<std::int64_t>(g.alpha * 1000))});
        const auto r = gateway::rate_hostility(rater, it->second, g.text, key);
        out.push_back({g, it->second, r.rating, r.is_hostile, r.behavior_type});
    }
    return out;
}

void write_ratings_jsonl(const std::filesystem::path& path, const std::vector<RatedGeneration>& rated) {
    std::string out;
    for (const auto& r : rated)
        out += nlohmann::json{{"alpha", r.generation.alpha},     {"scenario", r.scenario},
                              {"prompt_id", r.generation.prompt_id}, {"sample", r.generation.sample},
                              {"rating", r.rating},              {"is_hostile", r.is_hostile},
                              {"behavior_type", r.behavior_type}}
                   .dump() +
               "\n";
    write_file_atomic(path, out);
}

std::vector<LabelledSample> filter_hostility_samples(const std::vector<LabelledSample>& samples, double midpoint) {
    std::vector<LabelledSample> out;
    for (const auto& s : samples)
        if (s.instructed_hostile == (s.rating >= midpoint)) out.push_back(s);
    return out;
}

}  // namespace igsim::ctl
