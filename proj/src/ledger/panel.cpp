#include "igsim/ledger/panel.hpp"

#include <cmath>
#include <set>
#include <tuple>

#include "igsim/common/errors.hpp"
#include "igsim/world/probe.hpp"

namespace igsim::ledger {

using inferkit::kMissing;

namespace {

double opt(const std::optional<long>& v) { return v ? static_cast<double>(*v) : kMissing; }

double rate(const std::optional<long>& num, const std::optional<long>& den) {
    if (!num || !den) return kMissing;
    return *den > 0 ? static_cast<double>(*num) / static_cast<double>(*den) : 0.0;
}

std::vector<double> zscore(const std::vector<double>& x) {
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = sd > 0 ? (x[i] - mean) / sd : 0.0;
    return z;
}

}  // namespace

std::vector<HourlyPanelRow> build_hourly_panel(const StreamHeader& h, const std::vector<AnnotatedEvent>& events,
                                               const std::vector<world::ProbeRecord>& probes, const PanelOptions& opts) {
    const std::size_t n_agents = h.agents.size();
    if (h.hours <= 0) throw ValidationError("panel needs a positive hour count");
    {
        std::set<std::string> names(h.agents.begin(), h.agents.end());
        if (names.size() != n_agents) throw IntegrityError("duplicate agent names in run " + h.run_id);
    }
    std::size_t n_b = 0;
    for (const auto& g : h.groups) n_b += g == "B";
    const std::string minority_group =
        !h.cell.asymmetric ? "" : (n_b * 2 < n_agents ? "B" : (n_b * 2 > n_agents ? "A" : ""));

    const auto hours = static_cast<std::size_t>(h.hours);
    std::vector<HourlyPanelRow> rows(n_agents * hours);
    const auto& scales = world::probe_scales();
    for (std::size_t a = 0; a < n_agents; ++a)
        for (std::size_t t = 0; t < hours; ++t) {
            auto& r = rows[a * hours + t];
            r.run_id = h.run_id;
            r.agent = h.agents[a];
            r.agent_index = static_cast<int>(a);
            r.group = h.groups[a];
            r.minority = !minority_group.empty() && r.group == minority_group;
            r.hour = static_cast<long>(t);
            r.realistic = h.cell.realistic == xdesign::Threat::strong;
            r.symbolic = h.cell.symbolic == xdesign::Threat::strong;
            r.segregated = h.cell.segregated;
            r.asymmetric = h.cell.asymmetric;
            for (const auto& s : scales) r.attitudes[s] = kMissing;
        }

    auto row_of = [&](int agent, long hour, const char* what) -> HourlyPanelRow& {
        if (agent < 0 || static_cast<std::size_t>(agent) >= n_agents)
            throw IntegrityError(std::string(what) + " references unknown agent index " + std::to_string(agent));
        if (hour < 0 || hour >= h.hours)
            throw IntegrityError(std::string(what) + " at hour " + std::to_string(hour) + " lies outside the run");
        return rows[static_cast<std::size_t>(agent) * hours + static_cast<std::size_t>(hour)];
    };

    for (const auto& a : events) {
        const auto& e = a.event;
        if (e.run_id != h.run_id) throw IntegrityError("event from run '" + e.run_id + "' in panel for '" + h.run_id + "'");
        auto& r = row_of(e.initiator_index, e.sim_hour, "event");
        if (r.agent != e.initiator) throw IntegrityError("event initiator name disagrees with header roster");
        if (e.social) ++r.social_actions;
        if (!opts.social_only || e.social) ++r.total_actions;
        if (a.hostile.value_or(false)) ++r.hostile_count;
        if (a.contact) ++r.contact_count;
        if (e.kind == world::EventKind::conversation_turn) ++r.conversation_count;
        if (a.linguistic && a.linguistic->hate >= kHateThreshold) ++r.hate_count;
    }

    std::map<std::pair<std::size_t, std::string>, std::pair<double, int>> sums;
    for (const auto& p : probes) {
        if (!p.response) continue;
        const long hour = p.tick * 10 / 3600;
        row_of(p.agent_index, hour, "probe");
        auto& s = sums[{static_cast<std::size_t>(p.agent_index) * hours + static_cast<std::size_t>(hour), p.scale_id}];
        s.first += *p.response;
        ++s.second;
    }
    for (const auto& [key, s] : sums) rows[key.first].attitudes[key.second] = s.first / s.second;

    for (std::size_t a = 0; a < n_agents; ++a)
        for (std::size_t t = 0; t < hours; ++t) {
            auto& r = rows[a * hours + t];
            for (const auto& s : scales) r.attitudes_lag[s] = kMissing;
            if (t == 0) continue;
            const auto& p = rows[a * hours + t - 1];
            r.hostile_lag = p.hostile_count;
            r.total_lag = p.total_actions;
            r.contact_lag = p.contact_count;
            r.hate_lag = p.hate_count;
            r.conversation_lag = p.conversation_count;
            for (const auto& s : scales) r.attitudes_lag[s] = p.attitudes.at(s);
        }
    return rows;
}

std::vector<HourlyPanelRow> concat_panels(const std::vector<std::vector<HourlyPanelRow>>& panels) {
    std::vector<HourlyPanelRow> out;
    std::set<std::tuple<std::string, std::string, long>> seen;
    for (const auto& p : panels)
        for (const auto& r : p) {
            if (!seen.emplace(r.run_id, r.agent, r.hour).second)
                throw IntegrityError("duplicate panel row (" + r.run_id + ", " + r.agent + ", " + std::to_string(r.hour) + ")");
            out.push_back(r);
        }
    return out;
}

std::vector<SystemPanelRow> aggregate_system(const std::vector<HourlyPanelRow>& panel) {
    std::map<std::pair<std::string, long>, SystemPanelRow> acc;
    std::map<std::string, long> max_hour;
    for (const auto& r : panel) {
        auto& s = acc[{r.run_id, r.hour}];
        s.run_id = r.run_id;
        s.hour = r.hour;
        s.hostile_count += r.hostile_count;
        s.total_actions += r.total_actions;
        s.social_actions += r.social_actions;
        s.contact_count += r.contact_count;
        s.hate_count += r.hate_count;
        s.conversation_count += r.conversation_count;
        s.realistic = r.realistic;
        s.symbolic = r.symbolic;
        s.segregated = r.segregated;
        s.asymmetric = r.asymmetric;
        max_hour[r.run_id] = std::max(max_hour[r.run_id], r.hour);
    }
    std::vector<SystemPanelRow> out;
    for (const auto& [run, last] : max_hour) {
        const SystemPanelRow* prev = nullptr;
        for (long t = 0; t <= last; ++t) {
            auto it = acc.find({run, t});
            SystemPanelRow s;
            if (it != acc.end()) s = it->second;
            else {
                s = acc.at({run, last});
                s.hour = t;
                s.hostile_count = s.total_actions = s.social_actions = s.contact_count = s.hate_count =
                    s.conversation_count = 0;
            }
            s.hostile_lag = s.total_lag = s.contact_lag = s.hate_lag = s.conversation_lag = std::nullopt;
            if (prev) {
                s.hostile_lag = prev->hostile_count;
                s.total_lag = prev->total_actions;
                s.contact_lag = prev->contact_count;
                s.hate_lag = prev->hate_count;
                s.conversation_lag = prev->conversation_count;
            }
            out.push_back(s);
            prev = &out.back();
        }
    }
    return out;
}

const std::vector<std::string>& panel_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c = {"run_id",           "agent",          "agent_index",     "group",
                                      "minority",         "hour",           "hostile_count",   "total_actions",
                                      "social_actions",   "contact_count",  "hate_count",      "conversation_count",
                                      "hostile_lag",      "total_lag",      "contact_lag",     "hate_lag",
                                      "conversation_lag", "hostile_rate_lag", "contact_rate_lag", "hate_rate_lag"};
        for (const auto& s : world::probe_scales()) c.push_back(s);
        for (const auto& s : world::probe_scales()) c.push_back(s + "_lag");
        for (const char* f : {"realistic", "symbolic", "segregated", "asymmetric", "time_z"}) c.push_back(f);
        return c;
    }();
    return cols;
}

const std::vector<std::string>& system_columns() {
    static const std::vector<std::string> cols = {
        "run_id",      "hour",          "hostile_count",    "total_actions",    "social_actions",
        "contact_count", "hate_count",  "conversation_count", "hostile_lag",    "total_lag",
        "contact_lag", "hate_lag",      "conversation_lag", "hostile_rate_lag", "contact_rate_lag",
        "hate_rate_lag", "realistic",   "symbolic",         "segregated",       "asymmetric",
        "time_z"};
    return cols;
}

inferkit::Frame panel_frame(const std::vector<HourlyPanelRow>& panel) {
    const std::size_t n = panel.size();
    std::map<std::string, std::vector<double>> num;
    std::map<std::string, std::vector<std::string>> txt;
    std::vector<double> hour(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = panel[i];
        txt["run_id"].push_back(r.run_id);
        txt["agent"].push_back(r.agent);
        txt["group"].push_back(r.group);
        num["agent_index"].push_back(r.agent_index);
        num["minority"].push_back(r.minority);
        num["hour"].push_back(static_cast<double>(r.hour));
        num["hostile_count"].push_back(static_cast<double>(r.hostile_count));
        num["total_actions"].push_back(static_cast<double>(r.total_actions));
        num["social_actions"].push_back(static_cast<double>(r.social_actions));
        num["contact_count"].push_back(static_cast<double>(r.contact_count));
        num["hate_count"].push_back(static_cast<double>(r.hate_count));
        num["conversation_count"].push_back(static_cast<double>(r.conversation_count));
        num["hostile_lag"].push_back(opt(r.hostile_lag));
        num["total_lag"].push_back(opt(r.total_lag));
        num["contact_lag"].push_back(opt(r.contact_lag));
        num["hate_lag"].push_back(opt(r.hate_lag));
        num["conversation_lag"].push_back(opt(r.conversation_lag));
        num["hostile_rate_lag"].push_back(rate(r.hostile_lag, r.total_lag));
        num["contact_rate_lag"].push_back(rate(r.contact_lag, r.total_lag));
        num["hate_rate_lag"].push_back(rate(r.hate_lag, r.conversation_lag));
        for (const auto& s : world::probe_scales()) {
            num[s].push_back(r.attitudes.count(s) ? r.attitudes.at(s) : kMissing);
            num[s + "_lag"].push_back(r.attitudes_lag.count(s) ? r.attitudes_lag.at(s) : kMissing);
        }
        num["realistic"].push_back(r.realistic);
        num["symbolic"].push_back(r.symbolic);
        num["segregated"].push_back(r.segregated);
        num["asymmetric"].push_back(r.asymmetric);
        hour[i] = static_cast<double>(r.hour);
    }
    num["time_z"] = n ? zscore(hour) : std::vector<double>{};
    inferkit::Frame f;
    for (const auto& c : panel_columns()) {
        if (txt.count(c)) f.add_text(c, std::move(txt[c]));
        else f.add_numeric(c, std::move(num[c]));
    }
    return f;
}

inferkit::Frame system_frame(const std::vector<SystemPanelRow>& rows) {
    std::map<std::string, std::vector<double>> num;
    std::vector<std::string> run;
    std::vector<double> hour;
    for (const auto& r : rows) {
        run.push_back(r.run_id);
        hour.push_back(static_cast<double>(r.hour));
        num["hour"].push_back(static_cast<double>(r.hour));
        num["hostile_count"].push_back(static_cast<double>(r.hostile_count));
        num["total_actions"].push_back(static_cast<double>(r.total_actions));
        num["social_actions"].push_back(static_cast<double>(r.social_actions));
        num["contact_count"].push_back(static_cast<double>(r.contact_count));
        num["hate_count"].push_back(static_cast<double>(r.hate_count));
        num["conversation_count"].push_back(static_cast<double>(r.conversation_count));
        num["hostile_lag"].push_back(opt(r.hostile_lag));
        num["total_lag"].push_back(opt(r.total_lag));
        num["contact_lag"].push_back(opt(r.contact_lag));
        num["hate_lag"].push_back(opt(r.hate_lag));
        num["conversation_lag"].push_back(opt(r.conversation_lag));
        num["hostile_rate_lag"].push_back(rate(r.hostile_lag, r.total_lag));
        num["contact_rate_lag"].push_back(rate(r.contact_lag, r.total_lag));
        num["hate_rate_lag"].push_back(rate(r.hate_lag, r.conversation_lag));
        num["realistic"].push_back(r.realistic);
        num["symbolic"].push_back(r.symbolic);
        num["segregated"].push_back(r.segregated);
        num["asymmetric"].push_back(r.asymmetric);
    }
    num["time_z"] = rows.empty() ? std::vector<double>{} : zscore(hour);
    inferkit::Frame f;
    for (const auto& c : system_columns()) {
        if (c == "run_id") f.add_text(c, run);
        else f.add_numeric(c, std::move(num[c]));
    }
    return f;
}

}  // namespace igsim::ledger
