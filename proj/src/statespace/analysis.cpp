#include "igsim/statespace/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace igsim::statespace {

std::vector<double> ProjectionSet::scores_for(const std::string& label) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) out.push_back(scores[i]);
    return out;
}

ProjectionSet project(const ActivationDump& dump, const ConceptVector& vector, const ProjectOptions& opts) {
    if (vector.layer >= dump.n_layers())
        throw ValidationError("vector layer " + std::to_string(vector.layer) + " >= dump layers " +
                              std::to_string(dump.n_layers()));
    if (vector.direction.size() != dump.dim())
        throw ValidationError("vector dim " + std::to_string(vector.direction.size()) + " != dump dim " +
                              std::to_string(dump.dim()));
    const auto d = dump.dim();
    std::vector<double> center(d, 0.0);
    if (opts.center && dump.n_inputs() > 0) {
        for (std::size_t i = 0; i < dump.n_inputs(); ++i) {
            const auto row = dump.at(i, vector.layer);
            for (std::size_t k = 0; k < d; ++k) center[k] += row[k];
        }
        for (auto& c : center) c /= static_cast<double>(dump.n_inputs());
    }
    ProjectionSet out;
    out.layer = vector.layer;
    out.labels = dump.labels();
    out.scores.reserve(dump.n_inputs());
    for (std::size_t i = 0; i < dump.n_inputs(); ++i) {
        const auto row = dump.at(i, vector.layer);
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += vector.direction[k] * (static_cast<double>(row[k]) - center[k]);
        out.scores.push_back(s);
    }
    return out;
}

LayerSweep layer_sweep(const ActivationDump& extraction, const std::string& label_a, const std::string& label_b,
                       const ActivationDump& heldout) {
    if (extraction.dim() != heldout.dim() || extraction.n_layers() != heldout.n_layers())
        throw ValidationError("layer_sweep: extraction and held-out dumps differ in shape");
    const std::set<std::string> seen(extraction.input_sha256().begin(), extraction.input_sha256().end());
    for (const auto& h : heldout.input_sha256())
        if (seen.count(h)) throw ValidationError("layer_sweep: held-out input " + h + " also used for extraction");

    LayerSweep sweep{label_a, label_b, {}};
    for (std::size_t layer = 0; layer < extraction.n_layers(); ++layer) {
        LayerSweepRow row;
        row.layer = layer;
        try {
            const auto v = mean_diff_vector(extraction, label_a, label_b, layer);
            const auto proj = project(heldout, v);
            const auto a = proj.scores_for(label_a);
            const auto b = proj.scores_for(label_b);
            const auto t = inferkit::welch_cohen(a, b);
            row.cohen_d = t.cohen_d;
            row.mean_diff = t.mean_diff;
            row.wasserstein = inferkit::wasserstein_distance(a, b);
        } catch (const Error&) {
            // Degenerate layer: leave the row empty and keep sweeping.
        }
        sweep.rows.push_back(row);
    }
    return sweep;
}

std::vector<std::size_t> select_steering_layers(const LayerSweep& sweep, std::size_t k) {
    std::vector<const LayerSweepRow*> usable;
    for (const auto& r : sweep.rows)
        if (r.cohen_d) usable.push_back(&r);
    std::stable_sort(usable.begin(), usable.end(),
                     [](const auto* a, const auto* b) { return *a->cohen_d > *b->cohen_d; });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, usable.size()); ++i) out.push_back(usable[i]->layer);
    std::sort(out.begin(), out.end());
    return out;
}

ContrastReport contrast_report(const ActivationDump& dump, const std::vector<ConceptVector>& vectors,
                               const std::vector<std::pair<std::string, std::string>>& pairs,
                               const ContrastOptions& opts) {
    ContrastReport rep;
    for (const auto& v : vectors) {
        const auto proj = project(dump, v, opts.project);
        std::vector<std::string> labels;
        for (const auto& [a, b] : pairs) {
            for (const auto& l : {a, b})
                if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
        }
        for (const auto& l : labels) {
            const auto s = proj.scores_for(l);
            if (s.empty()) throw ValidationError("contrast_report: no inputs labeled '" + l + "'");
            rep.descriptives.push_back({v.name, l, inferkit::describe(s)});
        }
        for (const auto& [a, b] : pairs) {
            const auto sa = proj.scores_for(a);
            const auto sb = proj.scores_for(b);
            ContrastRow row;
            row.vector = v.name;
            row.layer = v.layer;
            row.label_a = a;
            row.label_b = b;
            row.n_a = sa.size();
            row.n_b = sb.size();
            row.stats = inferkit::compare_samples(sa, sb, opts.n_perm, opts.seed);
            rep.rows.push_back(row);
        }
    }
    return rep;
}

}  // namespace igsim::statespace
