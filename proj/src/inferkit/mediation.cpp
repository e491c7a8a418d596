#include "igsim/inferkit/mediation.hpp"

#include <algorithm>
#include <cmath>

#include "igsim/common/parallel.hpp"
#include "igsim/common/rng.hpp"
#include "igsim/inferkit/design.hpp"
#include "igsim/inferkit/nb2.hpp"
#include "igsim/inferkit/ols.hpp"

namespace igsim::inferkit {

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ValidationError("quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

Eigen::Index index_of(const std::vector<std::string>& names, const std::string& name) {
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] == name) return static_cast<Eigen::Index>(j);
    throw ValidationError("no coefficient named " + name);
}

struct PathEstimates {
    std::vector<double> a, b, direct;
};

PathEstimates estimate(const Design& med, const Design& out, const MediationSpec& spec, const Nb2Options& opt) {
    const auto lin = ols_fit(med);
    const auto cnt = nb2_fit(out, opt);
    PathEstimates e;
    const double b = cnt.beta(index_of(cnt.names, spec.mediator));
    for (const auto& t : spec.treatments) {
        e.a.push_back(lin.beta(index_of(lin.names, t)));
        e.b.push_back(b);
        e.direct.push_back(cnt.beta(index_of(cnt.names, t)));
    }
    return e;
}

}  // namespace

std::vector<MediationResult> mediation_boot(const Frame& frame, const MediationSpec& spec, int replicates,
                                            std::uint64_t seed, unsigned threads) {
    if (spec.treatments.empty()) throw ValidationError("mediation: no treatment columns");
    if (replicates < 2) throw ValidationError("mediation: need at least 2 bootstrap replicates");

    // Keep rows complete for both models so the two designs share row order.
    std::vector<std::string> needed = spec.treatments;
    needed.push_back(spec.mediator);
    needed.push_back(spec.outcome);
    needed.insert(needed.end(), spec.controls.begin(), spec.controls.end());
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        bool ok = true;
        for (const auto& c : needed) ok = ok && !is_missing(frame.numeric(c)[r]);
        if (spec.exposure) {
            const double e = frame.numeric(*spec.exposure)[r];
            ok = ok && !is_missing(e) && e > 0;
        }
        if (ok) keep.push_back(r);
    }
    const Frame sub = frame.take(keep);

    ModelSpec med_spec;
    med_spec.response = spec.mediator;
    for (const auto& t : spec.treatments) med_spec.terms.push_back(Term::column(t));
    for (const auto& c : spec.controls) med_spec.terms.push_back(Term::column(c));
    med_spec.cluster = spec.cluster;

    ModelSpec out_spec;
    out_spec.response = spec.outcome;
    out_spec.terms.push_back(Term::column(spec.mediator));
    for (const auto& t : spec.treatments) out_spec.terms.push_back(Term::column(t));
    for (const auto& c : spec.controls) out_spec.terms.push_back(Term::column(c));
    out_spec.offset = spec.exposure;
    out_spec.cluster = spec.cluster;

    const Design med = build_design(sub, med_spec);
    const Design out = build_design(sub, out_spec);
    if (out.n_clusters < kMinMediationClusters)
        throw InsufficientClustersError("mediation: " + std::to_string(out.n_clusters) + " clusters, need at least " +
                                        std::to_string(kMinMediationClusters));

    const auto point = estimate(med, out, spec, {});
    const auto base_fit = nb2_fit(out);
    Nb2Options warm;
    warm.start_beta = base_fit.beta;
    warm.start_theta = base_fit.theta;

    const auto k = spec.treatments.size();
    const auto B = static_cast<std::size_t>(replicates);
    std::vector<std::vector<double>> a(B), b(B), d(B);
    std::vector<char> ok(B, 0);
    parallel_for(
        B,
        [&](std::size_t r) {
            const auto rs = resample_clusters(out.cluster, out.n_clusters, mix_seed({seed, r}));
            try {
                const auto e = estimate(take_rows(med, rs.rows, &rs.cluster), take_rows(out, rs.rows, &rs.cluster),
                                        spec, warm);
                a[r] = e.a;
                b[r] = e.b;
                d[r] = e.direct;
                ok[r] = 1;
            } catch (const EstimationError&) {
            }
        },
        threads);

    std::vector<MediationResult> results;
    for (std::size_t t = 0; t < k; ++t) {
        MediationResult m;
        m.treatment = spec.treatments[t];
        m.a = point.a[t];
        m.b = point.b[t];
        m.indirect = m.a * m.b;
        m.direct = point.direct[t];
        std::vector<double> va, vb, vi, vd;
        for (std::size_t r = 0; r < B; ++r) {
            if (!ok[r]) continue;
            va.push_back(a[r][t]);
            vb.push_back(b[r][t]);
            vi.push_back(a[r][t] * b[r][t]);
            vd.push_back(d[r][t]);
        }
        m.replicates = static_cast<int>(va.size());
        m.failed = replicates - m.replicates;
        if (m.replicates < 2) throw EstimationError("mediation: bootstrap produced too few successful refits");
        auto ci = [](const std::vector<double>& v) { return Interval{quantile(v, 0.025), quantile(v, 0.975)}; };
        m.a_ci = ci(va);
        m.b_ci = ci(vb);
        m.indirect_ci = ci(vi);
        m.direct_ci = ci(vd);
        results.push_back(m);
    }
    return results;
}

}  // namespace igsim::inferkit
