#include "igsim/inferkit/ols.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "igsim/common/errors.hpp"

namespace igsim::inferkit {

LinearFit ols_fit(const Design& d) {
    const auto n = d.X.rows();
    const auto p = d.X.cols();
    if (n <= p) throw EstimationError("ols_fit: fewer rows than coefficients");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    qr.setThreshold(1e-12);
    if (qr.rank() < p) throw EstimationError("ols_fit: design matrix is rank deficient");

    LinearFit fit;
    fit.names = d.names;
    fit.n = static_cast<std::size_t>(n);
    fit.n_clusters = d.n_clusters;
    fit.beta = qr.solve(d.y);
    fit.residuals = d.y - d.X * fit.beta;
    fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - p);

    // (X'X)^-1 from R of the QR factorization.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * (rinv * rinv.transpose()) * perm.transpose();

    double df;
    if (d.clustered) {
        const Eigen::MatrixXd scores = d.X.array().colwise() * fit.residuals.array();
        fit.cov = cluster_sandwich(xtx_inv, scores, d.cluster, d.n_clusters);
        fit.cov *= static_cast<double>(n - 1) / static_cast<double>(n - p);
        df = std::max(1, d.n_clusters - 1);
    } else {
        fit.cov = fit.sigma2 * xtx_inv;
        df = static_cast<double>(n - p);
    }
    fit.se = fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.p.resize(p);
    const boost::math::students_t dist(df);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (fit.se(j) <= 0) {
            fit.p(j) = fit.beta(j) == 0.0 ? 1.0 : 0.0;
            continue;
        }
        const double t = fit.beta(j) / fit.se(j);
        fit.p(j) = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return fit;
}

LinearFit ols_fit(const Frame& frame, const ModelSpec& spec) {
    auto s = spec;
    s.offset.reset();
    return ols_fit(build_design(frame, s));
}

std::vector<CoefRow> LinearFit::table() const {
    std::vector<CoefRow> rows;
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        rows.push_back({names[j], beta(i), se(i), p(i)});
    }
    return rows;
}

double LinearFit::coef(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] == name) return beta(static_cast<Eigen::Index>(j));
    throw ValidationError("no coefficient named " + name);
}

}  // namespace igsim::inferkit
