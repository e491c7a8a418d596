#include "igsim/ctl/models.hpp"

#include "igsim/common/errors.hpp"
#include "igsim/inferkit/nb2.hpp"
#include "igsim/inferkit/ols.hpp"
#include "igsim/inferkit/report.hpp"

namespace igsim::ctl {

using inferkit::parse_terms;

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {"m1", "m2a", "m3a", "system"};
    return names;
}

ModelDef model_def(const std::string& name) {
    ModelDef m;
    m.name = name;
    const std::map<std::string, std::string> common = {{"(Intercept)", "Intercept"},
                                                       {"contact_rate_lag", "Intergroup contact rate (lag)"},
                                                       {"symbolic", "Symbolic threat"},
                                                       {"realistic", "Realistic threat"},
                                                       {"symbolic:realistic", "Symbolic x Realistic threat"},
                                                       {"time_z", "Time"}};
    m.labels = common;
    m.spec.cluster = "run_id";
    if (name == "m1" || name == "system") {
        m.title = name == "m1" ? "Predicting hourly hostile action rate" : "Predicting system-level hourly hostile action rate";
        m.spec.response = "hostile_count";
        m.spec.terms = parse_terms("hostile_rate_lag + contact_rate_lag + symbolic + realistic + symbolic:realistic + time_z");
        m.spec.offset = "total_actions";
        m.labels["hostile_rate_lag"] = "Hostile action rate (lag)";
    } else if (name == "m2a") {
        m.title = "Predicting hourly hateful language rate";
        m.spec.response = "hate_count";
        m.spec.terms = parse_terms("hate_rate_lag + contact_rate_lag + symbolic + realistic + symbolic:realistic + time_z");
        m.spec.offset = "conversation_count";
        m.labels["hate_rate_lag"] = "Hateful language rate (lag)";
    } else if (name == "m3a") {
        m.title = "Predicting ingroup bias attitudes";
        m.count = false;
        m.spec.response = "bias";
        m.spec.terms = parse_terms("bias_lag + symbolic + realistic + symbolic:realistic + time_z");
        m.labels.erase("contact_rate_lag");
        m.labels["bias_lag"] = "Group Bias (lag)";
    } else {
        throw ConfigError("unknown model '" + name + "' (expected m1, m2a, m3a or system)");
    }
    return m;
}

double FitReport::beta(const std::string& column) const {
    for (const auto& [label, col] : columns)
        if (col == column)
            for (const auto& r : rows)
                if (r.term == label) return r.beta;
    throw ValidationError("fit report has no coefficient for '" + column + "'");
}

FitReport fit_model(const inferkit::Frame& frame, const std::string& name) {
    const auto def = model_def(name);
    std::vector<std::string> needed = {def.spec.response};
    if (def.spec.offset) needed.push_back(*def.spec.offset);
    if (def.spec.cluster) needed.push_back(*def.spec.cluster);
    for (const auto& t : def.spec.terms)
        for (const auto& f : t.factors) needed.push_back(f);
    for (const auto& c : needed)
        if (!frame.has(c)) throw ValidationError("panel lacks column '" + c + "' required by model " + name);

    FitReport r;
    r.model = name;
    r.title = def.title;
    std::vector<inferkit::CoefRow> raw;
    if (def.count) {
        const auto fit = inferkit::nb2_fit(frame, def.spec);
        raw = fit.table();
        r.n = fit.n;
        r.n_clusters = fit.n_clusters;
        r.theta = fit.theta;
        r.log_likelihood = fit.log_likelihood;
        r.warnings = fit.warnings;
    } else {
        const auto fit = inferkit::ols_fit(frame, def.spec);
        raw = fit.table();
        r.n = fit.n;
        r.n_clusters = fit.n_clusters;
    }
    for (auto row : raw) {
        auto it = def.labels.find(row.term);
        const auto label = it == def.labels.end() ? row.term : it->second;
        r.columns[label] = row.term;
        row.term = label;
        r.rows.push_back(row);
    }
    return r;
}

nlohmann::json to_json(const FitReport& r) {
    nlohmann::json j = {{"model", r.model},
                        {"title", r.title},
                        {"N", r.n},
                        {"clusters", r.n_clusters},
                        {"coefficients", inferkit::coef_table_json(r.rows)}};
    if (r.theta) j["theta"] = *r.theta;
    if (r.log_likelihood) j["log_likelihood"] = *r.log_likelihood;
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    return j;
}

std::string to_csv(const FitReport& r) { return inferkit::coef_table_csv(r.rows); }

}  // namespace igsim::ctl
