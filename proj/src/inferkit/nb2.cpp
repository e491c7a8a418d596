#include "igsim/inferkit/nb2.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "igsim/common/errors.hpp"
#include "igsim/common/rng.hpp"

namespace igsim::inferkit {

namespace {

constexpr double kEtaMax = 30.0;

Eigen::VectorXd mean_of(const Design& d, const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = d.X * beta + d.offset;
    return eta.array().min(kEtaMax).exp();
}

// Sums over k < y of log(theta + k), 1/(theta + k), 1/(theta + k)^2. Exact for
// integer counts and free of the cancellation in lgamma/digamma differences.
struct GammaRatio {
    double log_sum = 0.0;
    double inv_sum = 0.0;
    double inv_sq_sum = 0.0;
};

GammaRatio gamma_ratio(double y, double theta) {
    GammaRatio g;
    const auto k_end = static_cast<long>(y);
    for (long k = 0; k < k_end; ++k) {
        const double t = theta + static_cast<double>(k);
        g.log_sum += std::log(t);
        g.inv_sum += 1.0 / t;
        g.inv_sq_sum += 1.0 / (t * t);
    }
    return g;
}

struct ThetaDerivs {
    double ll = 0.0;
    double d1 = 0.0;  // d ll / d theta
    double d2 = 0.0;  // d2 ll / d theta2
};

ThetaDerivs theta_derivs(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double theta) {
    ThetaDerivs out;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double yi = y(i), mi = mu(i);
        const auto g = gamma_ratio(yi, theta);
        const double tm = theta + mi;
        const double l1p = std::log1p(mi / theta);
        out.ll += g.log_sum - std::lgamma(yi + 1.0) - theta * l1p + (yi > 0 ? yi * (std::log(mi) - std::log(tm)) : 0.0);
        out.d1 += g.inv_sum - l1p + (mi - yi) / tm;
        out.d2 += -g.inv_sq_sum + 1.0 / theta - 2.0 / tm + (yi + theta) / (tm * tm);
    }
    return out;
}

void check_counts(const Design& d) {
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        const double v = d.y(i);
        if (v < 0 || v != std::floor(v))
            throw ValidationError("count response must be a non-negative integer (row " +
                                  std::to_string(d.rows[static_cast<std::size_t>(i)]) + ")");
    }
}

// A binary predictor whose level-0 or level-1 rows are all zero responses drives
// its coefficient to infinity.
std::vector<std::string> separating_columns(const Design& d) {
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
        if (d.names[static_cast<std::size_t>(j)] == "(Intercept)") continue;
        bool binary = true;
        double sum0 = 0, sum1 = 0;
        long n0 = 0, n1 = 0;
        for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
            const double x = d.X(i, j);
            if (x == 0.0) {
                sum0 += d.y(i);
                ++n0;
            } else if (x == 1.0) {
                sum1 += d.y(i);
                ++n1;
            } else {
                binary = false;
                break;
            }
        }
        if (binary && n0 > 0 && n1 > 0 && (sum0 == 0.0 || sum1 == 0.0)) out.push_back(d.names[static_cast<std::size_t>(j)]);
    }
    return out;
}

Eigen::MatrixXd ridge_matrix(const Design& d, double lambda) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d.X.cols(), d.X.cols());
    for (Eigen::Index j = 0; j < d.X.cols(); ++j)
        if (d.names[static_cast<std::size_t>(j)] != "(Intercept)") r(j, j) = lambda;
    return r;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
        throw EstimationError("design matrix is rank deficient");
    return ldlt.solve(b);
}

double ridge_penalty(const Eigen::MatrixXd& ridge, const Eigen::VectorXd& beta) {
    return 0.5 * beta.dot(ridge * beta);
}

}  // namespace

double nb2_loglik(const Design& d, const Eigen::VectorXd& beta, double theta) {
    return theta_derivs(d.y, mean_of(d, beta), theta).ll;
}

Eigen::VectorXd poisson_fit(const Design& d, int max_iter, double tol) {
    const auto p = d.X.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const double rate = std::max(d.y.sum(), 0.5) / d.offset.array().exp().sum();
    if (!d.names.empty() && d.names.front() == "(Intercept)") beta(0) = std::log(rate);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd mu = mean_of(d, beta);
        const Eigen::VectorXd z = (d.X * beta).array() + (d.y - mu).array() / mu.array();
        const Eigen::MatrixXd xtw = d.X.transpose() * mu.asDiagonal();
        const Eigen::VectorXd next = solve_spd(xtw * d.X, xtw * z);
        const double delta = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (delta < tol) return beta;
    }
    throw EstimationError("poisson IRLS did not converge");
}

namespace {

CountModelFit nb2_fit_impl(const Design& d, const Nb2Options& opt, bool force_ridge) {
    const auto n = d.X.rows();
    const auto p = d.X.cols();
    if (n == 0) throw ValidationError("nb2_fit: no usable rows");
    if (n <= p) throw EstimationError("nb2_fit: fewer rows than coefficients");
    if (d.n_clusters < 1) throw ValidationError("nb2_fit: at least one cluster required");
    check_counts(d);

    CountModelFit fit;
    fit.names = d.names;
    fit.n = static_cast<std::size_t>(n);
    fit.n_clusters = d.n_clusters;

    Eigen::MatrixXd ridge = Eigen::MatrixXd::Zero(p, p);
    if (auto sep = separating_columns(d); !sep.empty()) {
        std::string list;
        for (const auto& s : sep) list += (list.empty() ? "" : ", ") + s;
        fit.warnings.push_back("separation detected in " + list + "; ridge fallback lambda=" +
                               std::to_string(opt.ridge_lambda));
        fit.ridge = true;
        ridge = ridge_matrix(d, opt.ridge_lambda);
    } else if (force_ridge) {
        fit.warnings.push_back("unpenalized fit failed (quasi-separation suspected); ridge fallback lambda=" +
                               std::to_string(opt.ridge_lambda));
        fit.ridge = true;
        ridge = ridge_matrix(d, opt.ridge_lambda);
    }

    Eigen::VectorXd beta;
    if (opt.start_beta && opt.start_beta->size() == p) {
        beta = *opt.start_beta;
    } else if (fit.ridge) {
        beta = Eigen::VectorXd::Zero(p);
        if (d.names.front() == "(Intercept)")
            beta(0) = std::log(std::max(d.y.sum(), 0.5) / d.offset.array().exp().sum());
    } else {
        beta = poisson_fit(d);
    }

    double theta;
    if (opt.start_theta) {
        theta = *opt.start_theta;
    } else {
        // Moment estimate from Pearson-type residuals.
        const Eigen::VectorXd mu = mean_of(d, beta);
        double num = 0, den = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            num += mu(i) * mu(i);
            den += (d.y(i) - mu(i)) * (d.y(i) - mu(i)) - mu(i);
        }
        theta = den > 0 ? num / den : opt.theta_max;
    }
    theta = std::clamp(theta, 1e-4, opt.theta_max);
    double log_theta = std::log(theta);
    const double log_theta_max = std::log(opt.theta_max);

    std::ostringstream trace;
    double ll = nb2_loglik(d, beta, theta) - ridge_penalty(ridge, beta);
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        // Fisher-scoring (IRLS) step on beta at fixed theta.
        Eigen::VectorXd mu = mean_of(d, beta);
        const Eigen::ArrayXd w = mu.array() / (1.0 + mu.array() / theta);
        const Eigen::VectorXd score = d.X.transpose() * ((d.y - mu).array() / (1.0 + mu.array() / theta)).matrix() - ridge * beta;
        const Eigen::MatrixXd info = d.X.transpose() * w.matrix().asDiagonal() * d.X + ridge;
        Eigen::VectorXd step = solve_spd(info, score);
        double scale = 1.0;
        Eigen::VectorXd next = beta + step;
        double ll_next = nb2_loglik(d, next, theta) - ridge_penalty(ridge, next);
        while (ll_next < ll - 1e-12 * std::abs(ll) && scale > 1e-6) {
            scale *= 0.5;
            next = beta + scale * step;
            ll_next = nb2_loglik(d, next, theta) - ridge_penalty(ridge, next);
        }
        const double dbeta = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        ll = ll_next;

        // Newton steps on log(theta) at fixed beta.
        mu = mean_of(d, beta);
        double dlog = 0.0;
        for (int inner = 0; inner < 25; ++inner) {
            const auto td = theta_derivs(d.y, mu, theta);
            const double g = theta * td.d1;
            const double h = theta * td.d1 + theta * theta * td.d2;
            double delta = h < 0 ? -g / h : (g > 0 ? 1.0 : -1.0);
            delta = std::clamp(delta, -2.0, 2.0);
            double cand = std::min(log_theta + delta, log_theta_max);
            double ll_cand = theta_derivs(d.y, mu, std::exp(cand)).ll;
            int halvings = 0;
            while (ll_cand < td.ll - 1e-12 * std::abs(td.ll) && halvings < 40) {
                delta *= 0.5;
                cand = std::min(log_theta + delta, log_theta_max);
                ll_cand = theta_derivs(d.y, mu, std::exp(cand)).ll;
                ++halvings;
            }
            if (ll_cand < td.ll) cand = log_theta;
            const double moved = cand - log_theta;
            dlog += moved;
            log_theta = cand;
            theta = std::exp(log_theta);
            if (std::abs(moved) < opt.tol * 0.1) break;
        }
        ll = nb2_loglik(d, beta, theta) - ridge_penalty(ridge, beta);
        trace << "iter " << it << ": max|dbeta|=" << dbeta << " |dlog theta|=" << std::abs(dlog)
              << " theta=" << theta << " ll=" << ll << "\n";
        if (dbeta < opt.tol && std::abs(dlog) < opt.tol) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) {
        std::string t = trace.str();
        if (t.size() > 2000) t = "...\n" + t.substr(t.size() - 2000);
        throw EstimationError("nb2_fit did not converge in " + std::to_string(opt.max_iter) + " iterations\n" + t);
    }

    fit.beta = beta;
    fit.theta = theta;
    fit.iterations = it;
    fit.log_likelihood = nb2_loglik(d, beta, theta);

    const Eigen::VectorXd mu = mean_of(d, beta);
    const Eigen::ArrayXd resid = (d.y - mu).array() / (1.0 + mu.array() / theta);
    const Eigen::ArrayXd w = mu.array() / (1.0 + mu.array() / theta);
    fit.score_norm = (d.X.transpose() * resid.matrix() - ridge * beta).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd info = d.X.transpose() * w.matrix().asDiagonal() * d.X + ridge;
    fit.cov_model = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    if (d.clustered) {
        const Eigen::MatrixXd scores = d.X.array().colwise() * resid;
        fit.cov = cluster_sandwich(fit.cov_model, scores, d.cluster, d.n_clusters);
    } else {
        fit.cov = fit.cov_model;
    }
    fit.se = fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.p.resize(p);
    const boost::math::normal nd;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double z = fit.se(j) > 0 ? fit.beta(j) / fit.se(j) : 0.0;
        fit.p(j) = 2.0 * boost::math::cdf(boost::math::complement(nd, std::abs(z)));
    }
    if (theta >= opt.theta_max * (1 - 1e-12)) fit.warnings.push_back("theta reached its cap; data are Poisson-like");
    return fit;
}

}  // namespace

CountModelFit nb2_fit(const Design& d, const Nb2Options& opt) {
    try {
        return nb2_fit_impl(d, opt, false);
    } catch (const EstimationError& first) {
        if (opt.start_beta || d.X.rows() <= d.X.cols()) throw;
        try {
            return nb2_fit_impl(d, opt, true);
        } catch (const EstimationError& second) {
            throw EstimationError(std::string(first.what()) + "; ridge retry failed too: " + second.what());
        }
    }
}

CountModelFit nb2_fit(const Frame& frame, const ModelSpec& spec, const Nb2Options& options) {
    return nb2_fit(build_design(frame, spec), options);
}

std::vector<CoefRow> CountModelFit::table() const {
    std::vector<CoefRow> rows;
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        rows.push_back({names[j], beta(i), se(i), p(i)});
    }
    return rows;
}

double CountModelFit::coef(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] == name) return beta(static_cast<Eigen::Index>(j));
    throw ValidationError("no coefficient named " + name);
}

double CountModelFit::stderr_of(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] == name) return se(static_cast<Eigen::Index>(j));
    throw ValidationError("no coefficient named " + name);
}

Eigen::VectorXd nb2_bootstrap_se(const Design& d, int replicates, std::uint64_t seed, const Nb2Options& options) {
    if (replicates < 2) throw ValidationError("bootstrap needs at least 2 replicates");
    const auto base = nb2_fit(d, options);
    Nb2Options warm = options;
    warm.start_beta = base.beta;
    warm.start_theta = base.theta;
    const auto p = d.X.cols();
    Eigen::MatrixXd draws(replicates, p);
    int ok = 0;
    for (int b = 0; b < replicates; ++b) {
        const auto rs = resample_clusters(d.cluster, d.n_clusters, mix_seed({seed, static_cast<std::uint64_t>(b)}));
        try {
            const auto f = nb2_fit(take_rows(d, rs.rows, &rs.cluster), warm);
            draws.row(ok++) = f.beta.transpose();
        } catch (const EstimationError&) {
        }
    }
    if (ok < 2) throw EstimationError("bootstrap: too few successful refits");
    const Eigen::MatrixXd used = draws.topRows(ok);
    const Eigen::RowVectorXd mean = used.colwise().mean();
    return ((used.rowwise() - mean).array().square().colwise().sum() / (ok - 1)).sqrt().transpose();
}

}  // namespace igsim::inferkit
