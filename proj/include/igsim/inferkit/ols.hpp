#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igsim/inferkit/design.hpp"

namespace igsim::inferkit {

struct LinearFit {
    std::vector<std::string> names;
    Eigen::VectorXd beta;
    Eigen::VectorXd se;  // CR1 cluster-robust when clustered, else classical
    Eigen::VectorXd p;
    Eigen::MatrixXd cov;
    Eigen::VectorXd residuals;
    double sigma2 = 0.0;
    std::size_t n = 0;
    int n_clusters = 0;

    std::vector<CoefRow> table() const;
    double coef(const std::string& name) const;
};

/// Least squares via column-pivoted QR. The offset column, if any, is ignored.
LinearFit ols_fit(const Design& design);
LinearFit ols_fit(const Frame& frame, const ModelSpec& spec);

}  // namespace igsim::inferkit
