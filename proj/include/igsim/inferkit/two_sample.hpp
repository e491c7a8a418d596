#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "igsim/common/errors.hpp"

namespace igsim::inferkit {

/// Both samples are constant but differ, so the standardized effect is undefined.
class UndefinedEffectError : public Error {
public:
    using Error::Error;
};

struct Descriptives {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // n-1 denominator
};

Descriptives describe(std::span<const double> x);

struct TwoSampleResult {
    double t = 0.0;
    double df = 0.0;      // Welch-Satterthwaite
    double p = 1.0;       // two-sided
    double cohen_d = 0.0; // pooled-SD form
    double mean_diff = 0.0;
    double wasserstein = 0.0;
    double p_wasserstein = 1.0;
};

/// Welch t-test with Satterthwaite df and pooled-SD Cohen's d.
/// Requires at least two finite values per sample.
TwoSampleResult welch_cohen(std::span<const double> x, std::span<const double> y);

struct WassersteinResult {
    double distance = 0.0;
    double p = 1.0;
};

/// W1 distance between the empirical distributions of x and y.
double wasserstein_distance(std::span<const double> x, std::span<const double> y);

/// W1 distance with a label-permutation p value, (1 + #{D* >= D}) / (1 + n_perm).
/// Permutation r draws from a generator seeded by (seed, r), so the result does
/// not depend on evaluation order.
WassersteinResult wasserstein1d(std::span<const double> x, std::span<const double> y,
                                std::size_t n_perm = 10000, std::uint64_t seed = 0);

/// welch_cohen plus the Wasserstein fields.
TwoSampleResult compare_samples(std::span<const double> x, std::span<const double> y,
                                std::size_t n_perm = 10000, std::uint64_t seed = 0);

/// Two-sided 95% t-interval for the mean.
std::pair<double, double> mean_ci95(const Descriptives& d);

}  // namespace igsim::inferkit
