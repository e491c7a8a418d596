#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igsim/inferkit/design.hpp"

namespace igsim::inferkit {

struct Nb2Options {
    int max_iter = 200;
    double tol = 1e-8;
    /// Dispersion cap; Poisson-like data drive theta here.
    double theta_max = 1e8;
    /// Ridge used when a binary predictor separates zero from non-zero responses.
    double ridge_lambda = 1e-6;
    std::optional<Eigen::VectorXd> start_beta;
    std::optional<double> start_theta;
};

/// NB2 regression: log mu = X b + log(exposure), Var y = mu + mu^2 / theta.
struct CountModelFit {
    std::vector<std::string> names;
    Eigen::VectorXd beta;
    Eigen::VectorXd se;          // cluster-robust when clustered, else model-based
    Eigen::VectorXd p;           // two-sided normal
    Eigen::MatrixXd cov;
    Eigen::MatrixXd cov_model;   // inverse expected information
    double theta = 0.0;
    double log_likelihood = 0.0;
    double score_norm = 0.0;     // max |d loglik / d beta| at the returned estimate
    std::size_t n = 0;
    int n_clusters = 0;
    int iterations = 0;
    bool ridge = false;
    std::vector<std::string> warnings;

    std::vector<CoefRow> table() const;
    double coef(const std::string& name) const;
    double stderr_of(const std::string& name) const;
};

CountModelFit nb2_fit(const Design& design, const Nb2Options& options = {});
CountModelFit nb2_fit(const Frame& frame, const ModelSpec& spec, const Nb2Options& options = {});

/// Poisson GLM by IRLS with the same design conventions (log link, log offset).
Eigen::VectorXd poisson_fit(const Design& design, int max_iter = 100, double tol = 1e-10);

/// NB2 log-likelihood at (beta, theta).
double nb2_loglik(const Design& design, const Eigen::VectorXd& beta, double theta);

/// Standard errors from B cluster-bootstrap refits (percentile-free SD of estimates).
Eigen::VectorXd nb2_bootstrap_se(const Design& design, int replicates, std::uint64_t seed,
                                 const Nb2Options& options = {});

}  // namespace igsim::inferkit
