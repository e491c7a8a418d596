#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "igsim/inferkit/mediation.hpp"
#include "igsim/inferkit/two_sample.hpp"

namespace igsim::statespace {

struct RatingRecord {
    double alpha = 0.0;
    std::string scenario;
    double rating = 0.0;
};

struct SteeringRow {
    double alpha = 0.0;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    inferkit::Interval ci;  // 95% t-interval
};

struct SteeringContrast {
    double alpha_a = 0.0, alpha_b = 0.0;
    double df = 0.0, t = 0.0, p = 1.0, cohen_d = 0.0, mean_diff = 0.0;
};

struct SteeringEvalTable {
    std::string state;
    std::vector<SteeringRow> rows;
    std::vector<SteeringContrast> contrasts;
};

struct SteeringReportOptions {
    std::string state = "hostility";
    std::vector<double> alpha_grid = {-2.0, 0.0, 2.0};
    std::vector<std::pair<double, double>> contrasts = {{2.0, 0.0}, {2.0, -2.0}};
};

/// Descriptives per alpha and Welch contrasts (mean diff = first minus second).
/// Every grid alpha needs at least two ratings; ratings off the grid are rejected.
SteeringEvalTable steering_report(const std::vector<RatingRecord>& ratings, const SteeringReportOptions& opts = {});

/// JSONL rows {"alpha", "scenario", "rating"}.
std::vector<RatingRecord> read_ratings_jsonl(const std::filesystem::path& path);

}  // namespace igsim::statespace
