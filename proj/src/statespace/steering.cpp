#include "igsim/statespace/steering.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "igsim/common/errors.hpp"

namespace igsim::statespace {

namespace {

bool same_alpha(double a, double b) { return std::abs(a - b) < 1e-9; }

std::vector<double> ratings_at(const std::vector<RatingRecord>& all, double alpha) {
    std::vector<double> out;
    for (const auto& r : all)
        if (same_alpha(r.alpha, alpha)) out.push_back(r.rating);
    return out;
}

}  // namespace

SteeringEvalTable steering_report(const std::vector<RatingRecord>& ratings, const SteeringReportOptions& opts) {
    for (const auto& r : ratings) {
        bool on_grid = false;
        for (double a : opts.alpha_grid) on_grid = on_grid || same_alpha(a, r.alpha);
        if (!on_grid) throw ValidationError("rating with alpha " + std::to_string(r.alpha) + " is not on the grid");
        if (!std::isfinite(r.rating)) throw ValidationError("non-finite rating for scenario " + r.scenario);
    }
    SteeringEvalTable table;
    table.state = opts.state;
    for (double a : opts.alpha_grid) {
        const auto v = ratings_at(ratings, a);
        if (v.size() < 2) throw ValidationError("missing ratings for alpha " + std::to_string(a));
        const auto d = inferkit::describe(v);
        const auto [lo, hi] = inferkit::mean_ci95(d);
        table.rows.push_back({a, d.n, d.mean, d.sd, {lo, hi}});
    }
    for (const auto& [a, b] : opts.contrasts) {
        const auto va = ratings_at(ratings, a), vb = ratings_at(ratings, b);
        if (va.size() < 2 || vb.size() < 2)
            throw ValidationError("contrast alpha " + std::to_string(a) + " vs " + std::to_string(b) + " lacks ratings");
        const auto t = inferkit::welch_cohen(va, vb);
        table.contrasts.push_back({a, b, t.df, t.t, t.p, t.cohen_d, t.mean_diff});
    }
    return table;
}

std::vector<RatingRecord> read_ratings_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::vector<RatingRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto where = path.string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw SchemaError("line", where + ": not JSON");
        }
        for (const char* key : {"alpha", "rating"})
            if (!j.contains(key) || !j[key].is_number()) throw SchemaError(key, where + ": missing numeric '" + key + "'");
        out.push_back({j["alpha"].get<double>(), j.value("scenario", ""), j["rating"].get<double>()});
    }
    return out;
}

}  // namespace igsim::statespace
