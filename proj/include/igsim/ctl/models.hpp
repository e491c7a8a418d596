#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/inferkit/design.hpp"
#include "igsim/inferkit/frame.hpp"

namespace igsim::ctl {

struct ModelDef {
    std::string name;
    std::string title;
    bool count = true;  // NB2; otherwise OLS
    inferkit::ModelSpec spec;
    std::map<std::string, std::string> labels;  // design column -> table label
};

/// m1, m2a, m3a or system. Unknown names raise ConfigError.
ModelDef model_def(const std::string& name);
const std::vector<std::string>& model_names();

struct FitReport {
    std::string model;
    std::string title;
    std::vector<inferkit::CoefRow> rows;  // labelled
    std::size_t n = 0;
    int n_clusters = 0;
    std::optional<double> theta;
    std::optional<double> log_likelihood;
    std::vector<std::string> warnings;

    double beta(const std::string& column) const;
    std::map<std::string, std::string> columns;  // label -> design column
};

/// Checks that every column the model needs is present (ValidationError
/// naming the first missing one) and fits it.
FitReport fit_model(const inferkit::Frame& frame, const std::string& name);

nlohmann::json to_json(const FitReport& r);
std::string to_csv(const FitReport& r);

}  // namespace igsim::ctl
