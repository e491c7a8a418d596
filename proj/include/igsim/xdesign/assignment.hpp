#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "igsim/xdesign/condition.hpp"

namespace igsim::xdesign {

struct HomePoint {
    int x = 0;
    int y = 0;
};

struct AssignmentResult {
    std::vector<Group> group;  // by persona index
    std::size_t size_a = 0;
    std::size_t size_b = 0;
    double mean_between_distance = 0.0;
};

/// Target sizes: equal mode ceil/floor halves (13/12 for 25); asymmetric mode
/// gives Group B round(n/5) members (5 of 25).
std::pair<std::size_t, std::size_t> group_sizes(std::size_t n, bool asymmetric);

/// Mean Euclidean home distance over all cross-group pairs.
double mean_between_group_distance(const std::vector<HomePoint>& homes, const std::vector<Group>& group);

struct TwoMeansResult {
    std::array<double, 2> cx{}, cy{};
    std::vector<int> cluster;  // 0/1 per point
    double sse = 0.0;
    int iterations = 0;
};

/// Lloyd's algorithm with k=2: seeded first centre, farthest-point second
/// centre (lowest index on ties), at most 100 iterations.
TwoMeansResult two_means(const std::vector<HomePoint>& homes, std::uint64_t seed);

/// Group assignment for one run. Non-segregated cells draw a uniform split;
/// segregated cells cluster homes and cut the clusters to the target sizes.
AssignmentResult assign_groups(const std::vector<std::string>& names, const std::vector<HomePoint>& homes,
                               std::uint64_t seed, const ConditionCell& cell);

}  // namespace igsim::xdesign
