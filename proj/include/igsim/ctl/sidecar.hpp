#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/gateway/types.hpp"
#include "igsim/statespace/steering.hpp"

namespace igsim::ctl {

struct JobInput {
    std::string id;
    std::string text;
    std::string label;
};

struct ExtractionJob {
    std::string model;
    std::vector<JobInput> inputs;
    int repeats = 10;
    bool deterministic = false;  // greedy repeats instead of sampled ones
    gateway::DecodingParams decoding = gateway::DecodingParams::generative(0);
    std::filesystem::path output;
};

struct SteeringJob {
    std::string model;
    std::vector<JobInput> prompts;  // label unused
    std::vector<std::filesystem::path> vectors;
    std::vector<double> alphas = {-2.0, 0.0, 2.0};
    std::vector<int> layers;
    int generations = 10;
    gateway::DecodingParams decoding = gateway::DecodingParams::generative(0);
    std::filesystem::path output;
};

/// Validation mirrors the sidecar's contract: non-empty inputs, repeats >= 1,
/// alpha grid containing 0, at least one layer and vector.
nlohmann::json to_json(const ExtractionJob& j);
nlohmann::json to_json(const SteeringJob& j);
ExtractionJob extraction_job_from_json(const nlohmann::json& j);
SteeringJob steering_job_from_json(const nlohmann::json& j);

/// Inputs from a JSON list of {id, text, label}.
std::vector<JobInput> inputs_from_json(const nlohmann::json& j);

struct SidecarResult {
    int exit_code = -1;
};

/// Runs `command... <job_path>` as a child process and waits for it.
/// Standard error is inherited so progress reaches the terminal.
SidecarResult run_sidecar(const std::vector<std::string>& command, const std::filesystem::path& job_path);

struct Generation {
    std::string prompt_id;
    double alpha = 0.0;
    int sample = 0;
    std::string text;
};

std::vector<Generation> read_generations(const std::filesystem::path& path);

struct RatedGeneration {
    Generation generation;
    std::string scenario;
    double rating = 0.0;
    bool is_hostile = false;
    std::string behavior_type;
};

/// Rates every generation with the hostility rubric. `scenarios` maps
/// prompt ids to scenario text.
std::vector<RatedGeneration> rate_generations(const std::vector<Generation>& gens,
                                              const std::map<std::string, std::string>& scenarios,
                                              gateway::ModelGateway& rater, std::uint64_t seed);

void write_ratings_jsonl(const std::filesystem::path& path, const std::vector<RatedGeneration>& rated);

struct LabelledSample {
    std::string id;
    bool instructed_hostile = false;
    double rating = 0.0;
};

/// Keeps hostile-instructed samples rated at or above the midpoint and
/// non-hostile-instructed samples rated below it.
std::vector<LabelledSample> filter_hostility_samples(const std::vector<LabelledSample>& samples,
                                                     double midpoint = 3.0);

}  // namespace igsim::ctl
