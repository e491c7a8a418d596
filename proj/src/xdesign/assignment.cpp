#include "igsim/xdesign/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "igsim/common/errors.hpp"
#include "igsim/common/rng.hpp"

namespace igsim::xdesign {

namespace {

double sq_dist(const HomePoint& p, double cx, double cy) {
    const double dx = p.x - cx, dy = p.y - cy;
    return dx * dx + dy * dy;
}

}  // namespace

std::pair<std::size_t, std::size_t> group_sizes(std::size_t n, bool asymmetric) {
    if (asymmetric) {
        const auto b = static_cast<std::size_t>(std::lround(static_cast<double>(n) * 0.2));
        return {n - b, b};
    }
    return {n - n / 2, n / 2};
}

double mean_between_group_distance(const std::vector<HomePoint>& homes, const std::vector<Group>& group) {
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < homes.size(); ++i) {
        if (group[i] != Group::A) continue;
        for (std::size_t j = 0; j < homes.size(); ++j) {
            if (group[j] != Group::B) continue;
            acc += std::hypot(homes[i].x - homes[j].x, homes[i].y - homes[j].y);
            ++pairs;
        }
    }
    return pairs ? acc / static_cast<double>(pairs) : 0.0;
}

TwoMeansResult two_means(const std::vector<HomePoint>& homes, std::uint64_t seed) {
    const auto n = homes.size();
    if (n < 2) throw ConfigError("two_means: need at least 2 points");
    TwoMeansResult r;
    Rng rng(mix_seed({seed, fnv1a64("kmeans-init")}));
    const auto first = static_cast<std::size_t>(rng.below(n));
    std::size_t second = first;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sq_dist(homes[i], homes[first].x, homes[first].y);
        if (d > best) {
            best = d;
            second = i;
        }
    }
    r.cx = {static_cast<double>(homes[first].x), static_cast<double>(homes[second].x)};
    r.cy = {static_cast<double>(homes[first].y), static_cast<double>(homes[second].y)};
    r.cluster.assign(n, -1);

    for (r.iterations = 1; r.iterations <= 100; ++r.iterations) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = sq_dist(homes[i], r.cx[1], r.cy[1]) < sq_dist(homes[i], r.cx[0], r.cy[0]) ? 1 : 0;
            if (c != r.cluster[i]) {
                r.cluster[i] = c;
                changed = true;
            }
        }
        for (int c = 0; c < 2; ++c) {
            double sx = 0, sy = 0;
            std::size_t m = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (r.cluster[i] == c) {
                    sx += homes[i].x;
                    sy += homes[i].y;
                    ++m;
                }
            if (m) {
                r.cx[static_cast<std::size_t>(c)] = sx / static_cast<double>(m);
                r.cy[static_cast<std::size_t>(c)] = sy / static_cast<double>(m);
            }
        }
        if (!changed) break;
    }
    r.iterations = std::min(r.iterations, 100);
    r.sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(r.cluster[i]);
        r.sse += sq_dist(homes[i], r.cx[c], r.cy[c]);
    }
    return r;
}

AssignmentResult assign_groups(const std::vector<std::string>& names, const std::vector<HomePoint>& homes,
                               std::uint64_t seed, const ConditionCell& cell) {
    if (names.size() != homes.size()) throw ConfigError("assign_groups: names and homes differ in length");
    if (names.size() < 2) throw ConfigError("assign_groups: need at least 2 personas");
    std::set<std::string> unique;
    for (const auto& n : names)
        if (!unique.insert(n).second) throw ConfigError("duplicate persona name '" + n + "'");

    const auto n = names.size();
    const auto [size_a, size_b] = group_sizes(n, cell.asymmetric);
    AssignmentResult res;
    res.group.assign(n, Group::A);

    if (!cell.segregated) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(mix_seed({seed, fnv1a64("assign-groups")}));
        for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
        for (std::size_t k = 0; k < size_b; ++k) res.group[idx[k]] = Group::B;
    } else {
        const auto km = two_means(homes, seed);
        // Cluster with the lower centroid x (then y) is the Group A side.
        std::size_t ca = 0;
        if (km.cx[1] < km.cx[0] || (km.cx[1] == km.cx[0] && km.cy[1] < km.cy[0])) ca = 1;
        const std::size_t cb = 1 - ca;
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        if (cell.asymmetric) {
            // Minority = the agents nearest the smaller cluster's centroid.
            const auto count1 = static_cast<std::size_t>(std::count(km.cluster.begin(), km.cluster.end(), 1));
            const auto count0 = n - count1;
            std::size_t small = count1 < count0 ? 1 : 0;
            if (count1 == count0) small = (km.cx[1] > km.cx[0] || (km.cx[1] == km.cx[0] && km.cy[1] > km.cy[0])) ? 1 : 0;
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return sq_dist(homes[a], km.cx[small], km.cy[small]) < sq_dist(homes[b], km.cx[small], km.cy[small]);
            });
        } else {
            // The larger cluster takes the larger half; B is cut by the squared
            // distance margin, which minimizes SSE for fixed centroids and sizes.
            const auto count_b = static_cast<std::size_t>(std::count(km.cluster.begin(), km.cluster.end(), static_cast<int>(cb)));
            const auto count_a = n - count_b;
            std::size_t b_cluster = cb, a_cluster = ca;
            if (count_b > count_a) {
                // Group B stays the smaller half; name the larger cluster A.
                std::swap(b_cluster, a_cluster);
            }
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t q) {
                const double mp = sq_dist(homes[p], km.cx[b_cluster], km.cy[b_cluster]) -
                                  sq_dist(homes[p], km.cx[a_cluster], km.cy[a_cluster]);
                const double mq = sq_dist(homes[q], km.cx[b_cluster], km.cy[b_cluster]) -
                                  sq_dist(homes[q], km.cx[a_cluster], km.cy[a_cluster]);
                return mp < mq;
            });
        }
        for (std::size_t k = 0; k < size_b; ++k) res.group[idx[k]] = Group::B;
    }
    res.size_a = static_cast<std::size_t>(std::count(res.group.begin(), res.group.end(), Group::A));
    res.size_b = n - res.size_a;
    res.mean_between_distance = mean_between_group_distance(homes, res.group);
    return res;
}

}  // namespace igsim::xdesign
