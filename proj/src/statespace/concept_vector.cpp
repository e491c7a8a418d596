#include "igsim/statespace/concept_vector.hpp"

#include <cmath>

#include "igsim/common/io.hpp"

namespace igsim::statespace {

ConceptVector mean_diff_vector(const ActivationDump& dump, const std::string& label_a, const std::string& label_b,
                               std::size_t layer, std::string name) {
    if (layer >= dump.n_layers()) throw ValidationError("layer " + std::to_string(layer) + " out of range");
    const auto ia = dump.indices_of(label_a);
    const auto ib = dump.indices_of(label_b);
    if (ia.size() < 2 || ib.size() < 2)
        throw ValidationError("mean_diff_vector: need at least 2 inputs per label ('" + label_a + "': " +
                              std::to_string(ia.size()) + ", '" + label_b + "': " + std::to_string(ib.size()) + ")");
    const auto d = dump.dim();
    std::vector<double> ma(d, 0.0), mb(d, 0.0);
    for (auto i : ia) {
        const auto row = dump.at(i, layer);
        for (std::size_t k = 0; k < d; ++k) ma[k] += row[k];
    }
    for (auto i : ib) {
        const auto row = dump.at(i, layer);
        for (std::size_t k = 0; k < d; ++k) mb[k] += row[k];
    }
    ConceptVector v;
    v.name = name.empty() ? label_a + "_vs_" + label_b : std::move(name);
    v.layer = layer;
    v.direction.resize(d);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        v.direction[k] = ma[k] / static_cast<double>(ia.size()) - mb[k] / static_cast<double>(ib.size());
        norm2 += v.direction[k] * v.direction[k];
    }
    const double norm = std::sqrt(norm2);
    if (norm < kDegenerateNorm)
        throw DegenerateContrastError("degenerate contrast at layer " + std::to_string(layer) + ": |v_raw| = " +
                                      std::to_string(norm));
    for (auto& c : v.direction) c /= norm;
    v.provenance = {label_a, label_b, dump_id(dump)};
    return v;
}

nlohmann::json to_json(const ConceptVector& v) {
    return {{"name", v.name},
            {"layer", v.layer},
            {"dim", v.direction.size()},
            {"direction", v.direction},
            {"provenance", {{"set_a", v.provenance.set_a}, {"set_b", v.provenance.set_b}, {"dump_id", v.provenance.dump_id}}}};
}

ConceptVector concept_vector_from_json(const nlohmann::json& j) {
    const std::string where = "vector file";
    ConceptVector v;
    v.name = require<std::string>(j, "name", where);
    v.layer = static_cast<std::size_t>(require<long long>(j, "layer", where));
    const auto dim = static_cast<std::size_t>(require<long long>(j, "dim", where));
    if (!j.contains("direction") || !j["direction"].is_array()) throw SchemaError("direction", where + ": missing 'direction'");
    v.direction = j["direction"].get<std::vector<double>>();
    if (v.direction.size() != dim) throw SchemaError("dim", where + ": direction length differs from dim");
    double n2 = 0;
    for (double c : v.direction) n2 += c * c;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-6) throw SchemaError("direction", where + ": direction is not unit norm");
    if (j.contains("provenance")) {
        const auto& p = j["provenance"];
        v.provenance.set_a = p.value("set_a", "");
        v.provenance.set_b = p.value("set_b", "");
        v.provenance.dump_id = p.value("dump_id", "");
    }
    return v;
}

ConceptVector read_vector(const std::filesystem::path& path) { return concept_vector_from_json(load_json(path)); }

void write_vector(const std::filesystem::path& path, const ConceptVector& v) {
    write_file_atomic(path, to_json(v).dump(2) + "\n");
}

}  // namespace igsim::statespace
