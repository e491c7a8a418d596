#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igsim/common/errors.hpp"
#include "igsim/inferkit/frame.hpp"

namespace igsim::inferkit {

class InsufficientClustersError : public Error {
public:
    using Error::Error;
};

struct MediationSpec {
    std::vector<std::string> treatments;
    std::string mediator;
    std::string outcome;                 // count response
    std::optional<std::string> exposure; // outcome-model offset base
    std::vector<std::string> controls;   // entered in both models
    std::string cluster = "run_id";      // resampling unit
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    bool covers(double v) const { return lower <= v && v <= upper; }
};

struct MediationResult {
    std::string treatment;
    double a = 0.0;        // treatment -> mediator (OLS)
    double b = 0.0;        // mediator -> outcome (NB2)
    double indirect = 0.0; // a * b
    double direct = 0.0;   // treatment -> outcome given mediator (NB2)
    Interval a_ci, b_ci, indirect_ci, direct_ci;
    int replicates = 0;
    int failed = 0;
};

inline constexpr int kMinMediationClusters = 10;

/// Product-of-coefficients mediation with percentile CIs from a cluster
/// bootstrap. Fewer than kMinMediationClusters clusters refuses the CI.
std::vector<MediationResult> mediation_boot(const Frame& frame, const MediationSpec& spec, int replicates = 2000,
                                            std::uint64_t seed = 0, unsigned threads = 0);

/// Type-7 sample quantile.
double quantile(std::vector<double> values, double q);

}  // namespace igsim::inferkit
