#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "igsim/common/errors.hpp"
#include "igsim/statespace/dump.hpp"

namespace igsim::statespace {

/// Mean(A) - mean(B) vanished at this layer.
class DegenerateContrastError : public Error {
public:
    using Error::Error;
};

struct Provenance {
    std::string set_a;
    std::string set_b;
    std::string dump_id;
};

/// Unit direction at one layer.
struct ConceptVector {
    std::string name;
    std::size_t layer = 0;
    std::vector<double> direction;
    Provenance provenance;
};

inline constexpr double kDegenerateNorm = 1e-10;

/// Difference-of-means direction between two labeled input sets, normalized.
/// Accumulates in double regardless of the float32 storage.
ConceptVector mean_diff_vector(const ActivationDump& dump, const std::string& label_a, const std::string& label_b,
                               std::size_t layer, std::string name = {});

nlohmann::json to_json(const ConceptVector& v);
ConceptVector concept_vector_from_json(const nlohmann::json& j);

ConceptVector read_vector(const std::filesystem::path& path);
void write_vector(const std::filesystem::path& path, const ConceptVector& v);

}  // namespace igsim::statespace
