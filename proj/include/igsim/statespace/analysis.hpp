#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "igsim/inferkit/two_sample.hpp"
#include "igsim/statespace/concept_vector.hpp"
#include "igsim/statespace/dump.hpp"

namespace igsim::statespace {

struct ProjectOptions {
    /// Subtract the dump-wide mean activation at the layer before projecting.
    bool center = false;
};

struct ProjectionSet {
    std::size_t layer = 0;
    std::vector<double> scores;  // one per dump input
    std::vector<std::string> labels;

    std::vector<double> scores_for(const std::string& label) const;
};

/// Signed component of each input's activation along the vector's direction.
ProjectionSet project(const ActivationDump& dump, const ConceptVector& vector, const ProjectOptions& opts = {});

struct LayerSweepRow {
    std::size_t layer = 0;
    std::optional<double> cohen_d;
    std::optional<double> wasserstein;
    std::optional<double> mean_diff;
};

struct LayerSweep {
    std::string label_a, label_b;
    std::vector<LayerSweepRow> rows;  // one per layer
};

/// Builds a vector per layer on `extraction` and scores held-out inputs.
/// Inputs are identified by input_sha256; any overlap is refused.
LayerSweep layer_sweep(const ActivationDump& extraction, const std::string& label_a, const std::string& label_b,
                       const ActivationDump& heldout);

/// Top-k layers by held-in Cohen's d (ties to the lower layer), ascending.
std::vector<std::size_t> select_steering_layers(const LayerSweep& sweep, std::size_t k = 5);

struct ContrastRow {
    std::string vector;
    std::size_t layer = 0;
    std::string label_a, label_b;
    std::size_t n_a = 0, n_b = 0;
    inferkit::TwoSampleResult stats;
};

struct LabelSummary {
    std::string vector;
    std::string label;
    inferkit::Descriptives projection;
};

struct ContrastReport {
    std::vector<ContrastRow> rows;
    std::vector<LabelSummary> descriptives;
};

struct ContrastOptions {
    std::size_t n_perm = 10000;
    std::uint64_t seed = 0;
    ProjectOptions project;
};

/// One row per (vector, label pair) plus a mean/SD block per (vector, label).
ContrastReport contrast_report(const ActivationDump& dump, const std::vector<ConceptVector>& vectors,
                               const std::vector<std::pair<std::string, std::string>>& pairs,
                               const ContrastOptions& opts = {});

}  // namespace igsim::statespace
