#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igsim/inferkit/frame.hpp"

namespace igsim::inferkit {

/// Product of one or more columns; a single factor is a main effect.
struct Term {
    std::string label;
    std::vector<std::string> factors;

    static Term column(std::string name) { return Term{name, {name}}; }
    static Term product(std::string label, std::vector<std::string> factors) {
        return Term{std::move(label), std::move(factors)};
    }
};

/// Terms written as "a + b + a:b".
std::vector<Term> parse_terms(const std::string& formula);

struct ModelSpec {
    std::string response;
    std::vector<Term> terms;
    bool intercept = true;
    /// Exposure column; the log is applied internally. Rows with exposure <= 0 are dropped.
    std::optional<std::string> offset;
    /// One-way clustering column for robust standard errors.
    std::optional<std::string> cluster;
};

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd offset;  // log exposure (zeros without an offset)
    std::vector<int> cluster;  // dense ids 0..n_clusters-1; row index when unclustered
    int n_clusters = 0;
    bool clustered = false;
    std::vector<std::string> names;
    std::vector<std::size_t> rows;  // source frame rows kept
};

/// Rows with a missing response/term, or a non-positive exposure, are dropped.
Design build_design(const Frame& frame, const ModelSpec& spec);

/// Row subset of a design (for cluster bootstraps); cluster ids are re-densified.
Design take_rows(const Design& d, const std::vector<std::size_t>& rows,
                 const std::vector<int>* relabel = nullptr);

/// Row indices for one cluster bootstrap resample. Each draw of a cluster
/// becomes its own cluster in the resample.
struct ClusterResample {
    std::vector<std::size_t> rows;
    std::vector<int> cluster;
};
ClusterResample resample_clusters(const std::vector<int>& cluster, int n_clusters, std::uint64_t seed);

/// One-way cluster-robust sandwich with the G/(G-1) small-sample factor.
/// scores holds per-row score contributions (rows x p).
Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& bread_inv, const Eigen::MatrixXd& scores,
                                 const std::vector<int>& cluster, int n_clusters);

struct CoefRow {
    std::string term;
    double beta = 0.0;
    double se = 0.0;
    double p = 1.0;
};

}  // namespace igsim::inferkit
