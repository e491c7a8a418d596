#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/inferkit/design.hpp"

namespace igsim::inferkit {

/// Predictor / beta / SE / p table as JSON rows.
nlohmann::json coef_table_json(const std::vector<CoefRow>& rows);

/// CSV with the header "Predictor,beta,SE,p".
std::string coef_table_csv(const std::vector<CoefRow>& rows);

/// APA-style p: "<.001" below one in a thousand, otherwise three decimals.
std::string format_p(double p);

}  // namespace igsim::inferkit
