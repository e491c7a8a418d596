#include "igsim/inferkit/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "igsim/common/rng.hpp"

namespace igsim::inferkit {

namespace {

void require_finite(std::span<const double> x, const char* name) {
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError(std::string("non-finite value in sample ") + name);
}

// Sorted inputs. Equal sizes use the order-statistic form; otherwise integrate
// |F_x - F_y| between consecutive merged breakpoints.
double wasserstein_sorted(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t nx = xs.size(), ny = ys.size();
    if (nx == ny) {
        double acc = 0.0;
        for (std::size_t i = 0; i < nx; ++i) acc += std::abs(xs[i] - ys[i]);
        return acc / static_cast<double>(nx);
    }
    std::size_t i = 0, j = 0;
    double prev = std::min(xs.front(), ys.front());
    double acc = 0.0;
    const double inx = 1.0 / static_cast<double>(nx), iny = 1.0 / static_cast<double>(ny);
    while (i < nx || j < ny) {
        double next;
        if (j >= ny || (i < nx && xs[i] <= ys[j])) next = xs[i];
        else next = ys[j];
        const double fx = static_cast<double>(i) * inx;
        const double fy = static_cast<double>(j) * iny;
        acc += (next - prev) * std::abs(fx - fy);
        while (i < nx && xs[i] == next) ++i;
        while (j < ny && ys[j] == next) ++j;
        prev = next;
    }
    return acc;
}

}  // namespace

Descriptives describe(std::span<const double> x) {
    Descriptives d;
    d.n = x.size();
    if (d.n == 0) return d;
    d.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(d.n);
    if (d.n > 1) {
        double ss = 0.0, corr = 0.0;
        for (double v : x) {
            ss += (v - d.mean) * (v - d.mean);
            corr += v - d.mean;
        }
        ss -= corr * corr / static_cast<double>(d.n);
        d.sd = std::sqrt(std::max(ss, 0.0) / static_cast<double>(d.n - 1));
    }
    return d;
}

TwoSampleResult welch_cohen(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2) throw ValidationError("welch_cohen: each sample needs at least 2 values");
    require_finite(x, "x");
    require_finite(y, "y");
    const auto dx = describe(x), dy = describe(y);
    const double nx = static_cast<double>(dx.n), ny = static_cast<double>(dy.n);
    const double vx = dx.sd * dx.sd / nx, vy = dy.sd * dy.sd / ny;
    const double se2 = vx + vy;

    TwoSampleResult r;
    r.mean_diff = dx.mean - dy.mean;
    if (se2 == 0.0) {
        if (r.mean_diff != 0.0)
            throw UndefinedEffectError("welch_cohen: zero pooled SD with unequal means");
        r.t = 0.0;
        r.df = nx + ny - 2.0;
        r.p = 1.0;
        r.cohen_d = 0.0;
        return r;
    }
    r.t = r.mean_diff / std::sqrt(se2);
    r.df = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    const boost::math::students_t dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    const double pooled = std::sqrt(((nx - 1.0) * dx.sd * dx.sd + (ny - 1.0) * dy.sd * dy.sd) / (nx + ny - 2.0));
    r.cohen_d = r.mean_diff / pooled;
    return r;
}

double wasserstein_distance(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ValidationError("wasserstein: empty sample");
    std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    return wasserstein_sorted(xs, ys);
}

WassersteinResult wasserstein1d(std::span<const double> x, std::span<const double> y, std::size_t n_perm,
                                std::uint64_t seed) {
    if (x.empty() || y.empty()) throw ValidationError("wasserstein: empty sample");
    require_finite(x, "x");
    require_finite(y, "y");
    WassersteinResult res;
    res.distance = wasserstein_distance(x, y);
    if (n_perm == 0) return res;

    // Sort the pooled sample once; a permutation only reassigns labels, so
    // walking the sorted pool keeps both halves sorted.
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::sort(pooled.begin(), pooled.end());
    const std::size_t n = pooled.size(), nx = x.size();
    std::vector<unsigned char> label(n);
    std::vector<double> px, py;
    px.reserve(nx);
    py.reserve(n - nx);
    const double tol = 1e-12 * std::max(1.0, res.distance);

    std::size_t exceed = 0;
    for (std::size_t r = 0; r < n_perm; ++r) {
        std::fill(label.begin(), label.begin() + static_cast<std::ptrdiff_t>(nx), 1);
        std::fill(label.begin() + static_cast<std::ptrdiff_t>(nx), label.end(), 0);
        Rng rng(mix_seed({seed, r}));
        for (std::size_t i = n - 1; i > 0; --i) std::swap(label[i], label[rng.below(i + 1)]);
        px.clear();
        py.clear();
        for (std::size_t i = 0; i < n; ++i) (label[i] ? px : py).push_back(pooled[i]);
        if (wasserstein_sorted(px, py) >= res.distance - tol) ++exceed;
    }
    res.p = static_cast<double>(exceed + 1) / static_cast<double>(n_perm + 1);
    return res;
}

TwoSampleResult compare_samples(std::span<const double> x, std::span<const double> y, std::size_t n_perm,
                                std::uint64_t seed) {
    auto r = welch_cohen(x, y);
    const auto w = wasserstein1d(x, y, n_perm, seed);
    r.wasserstein = w.distance;
    r.p_wasserstein = w.p;
    return r;
}

std::pair<double, double> mean_ci95(const Descriptives& d) {
    if (d.n < 2) return {d.mean, d.mean};
    const boost::math::students_t dist(static_cast<double>(d.n - 1));
    const double q = boost::math::quantile(dist, 0.975);
    const double half = q * d.sd / std::sqrt(static_cast<double>(d.n));
    return {d.mean - half, d.mean + half};
}

}  // namespace igsim::inferkit
