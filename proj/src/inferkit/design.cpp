#include "igsim/inferkit/design.hpp"

#include <map>
#include <sstream>

#include "igsim/common/errors.hpp"
#include "igsim/common/rng.hpp"

namespace igsim::inferkit {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<Term> parse_terms(const std::string& formula) {
    std::vector<Term> terms;
    std::stringstream ss(formula);
    std::string part;
    while (std::getline(ss, part, '+')) {
        part = trim(part);
        if (part.empty()) throw ValidationError("empty term in '" + formula + "'");
        Term t;
        t.label = part;
        std::stringstream fs(part);
        std::string f;
        while (std::getline(fs, f, ':')) {
            f = trim(f);
            if (f.empty()) throw ValidationError("empty factor in term '" + part + "'");
            t.factors.push_back(f);
        }
        terms.push_back(std::move(t));
    }
    return terms;
}

Design build_design(const Frame& frame, const ModelSpec& spec) {
    const auto& y = frame.numeric(spec.response);
    std::vector<std::vector<const std::vector<double>*>> cols;
    for (const auto& t : spec.terms) {
        std::vector<const std::vector<double>*> fs;
        for (const auto& f : t.factors) fs.push_back(&frame.numeric(f));
        cols.push_back(std::move(fs));
    }
    const std::vector<double>* exposure = spec.offset ? &frame.numeric(*spec.offset) : nullptr;

    Design d;
    if (spec.intercept) d.names.push_back("(Intercept)");
    for (const auto& t : spec.terms) d.names.push_back(t.label);

    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (is_missing(y[r])) continue;
        if (exposure && (is_missing((*exposure)[r]) || (*exposure)[r] <= 0.0)) continue;
        std::vector<double> row;
        if (spec.intercept) row.push_back(1.0);
        bool ok = true;
        for (const auto& fs : cols) {
            double v = 1.0;
            for (const auto* c : fs) v *= (*c)[r];
            if (is_missing(v)) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) continue;
        d.rows.push_back(r);
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(d.names.size());
    d.X.resize(n, p);
    d.y.resize(n);
    d.offset = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) d.X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const auto src = d.rows[static_cast<std::size_t>(i)];
        d.y(i) = y[src];
        if (exposure) d.offset(i) = std::log((*exposure)[src]);
    }

    d.cluster.resize(static_cast<std::size_t>(n));
    if (spec.cluster) {
        d.clustered = true;
        std::map<std::string, int> ids;
        const bool text = frame.is_text(*spec.cluster);
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            std::string key;
            if (text) {
                key = frame.text(*spec.cluster)[d.rows[i]];
            } else {
                const double v = frame.numeric(*spec.cluster)[d.rows[i]];
                if (is_missing(v)) throw ValidationError("missing cluster id in column " + *spec.cluster);
                std::ostringstream os;
                os.precision(17);
                os << v;
                key = os.str();
            }
            auto [it, inserted] = ids.emplace(key, static_cast<int>(ids.size()));
            d.cluster[i] = it->second;
        }
        d.n_clusters = static_cast<int>(ids.size());
    } else {
        for (std::size_t i = 0; i < d.cluster.size(); ++i) d.cluster[i] = static_cast<int>(i);
        d.n_clusters = static_cast<int>(n);
    }
    return d;
}

Design take_rows(const Design& d, const std::vector<std::size_t>& rows, const std::vector<int>* relabel) {
    Design out;
    out.names = d.names;
    out.clustered = d.clustered;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.X.resize(n, d.X.cols());
    out.y.resize(n);
    out.offset.resize(n);
    out.cluster.resize(rows.size());
    std::map<int, int> dense;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
        out.X.row(i) = d.X.row(r);
        out.y(i) = d.y(r);
        out.offset(i) = d.offset(r);
        out.rows.push_back(d.rows[static_cast<std::size_t>(r)]);
        const int raw = relabel ? (*relabel)[static_cast<std::size_t>(i)] : d.cluster[static_cast<std::size_t>(r)];
        auto [it, inserted] = dense.emplace(raw, static_cast<int>(dense.size()));
        out.cluster[static_cast<std::size_t>(i)] = it->second;
    }
    out.n_clusters = static_cast<int>(dense.size());
    return out;
}

ClusterResample resample_clusters(const std::vector<int>& cluster, int n_clusters, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < cluster.size(); ++i) members[static_cast<std::size_t>(cluster[i])].push_back(i);
    Rng rng(seed);
    ClusterResample out;
    for (int draw = 0; draw < n_clusters; ++draw) {
        const auto g = rng.below(static_cast<std::uint64_t>(n_clusters));
        for (auto r : members[g]) {
            out.rows.push_back(r);
            out.cluster.push_back(draw);
        }
    }
    return out;
}

Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& bread_inv, const Eigen::MatrixXd& scores,
                                 const std::vector<int>& cluster, int n_clusters) {
    const auto p = scores.cols();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_clusters, p);
    for (Eigen::Index i = 0; i < scores.rows(); ++i) sums.row(cluster[static_cast<std::size_t>(i)]) += scores.row(i);
    Eigen::MatrixXd meat = sums.transpose() * sums;
    if (n_clusters > 1) meat *= static_cast<double>(n_clusters) / static_cast<double>(n_clusters - 1);
    Eigen::MatrixXd v = bread_inv * meat * bread_inv;
    return 0.5 * (v + v.transpose());
}

}  // namespace igsim::inferkit
