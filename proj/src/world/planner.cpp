#include "igsim/world/planner.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "igsim/common/rng.hpp"
#include "igsim/world/clock.hpp"
#include "igsim/world/context.hpp"

namespace igsim::world {

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

long at(long day, int hour, int minute) { return day * kTicksPerDay + (hour * 60L + minute) * 60 / kSecondsPerTick; }

}  // namespace

std::vector<PlanItem> parse_plan_text(const std::string& text, long day_start_tick, const WorldMap& map) {
    static const std::regex line_re(R"(^\s*(?:[-*]\s*)?(\d{1,2}):(\d{2})\s*-\s*([^-]+?)\s*-\s*(.+?)\s*$)");
    std::vector<PlanItem> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (!std::regex_match(line, m, line_re)) continue;
        const int hh = std::stoi(m[1]);
        const int mm = std::stoi(m[2]);
        if (hh > 23 || mm > 59) continue;
        std::string loc = m[3];
        std::string resolved = "home";
        for (const auto& [name, cells] : map.locations())
            if (lower(name) == lower(loc)) resolved = name;
        out.push_back({day_start_tick + (hh * 60L + mm) * 60 / kSecondsPerTick, resolved, m[4], false});
    }
    std::stable_sort(out.begin(), out.end(), [](const PlanItem& a, const PlanItem& b) { return a.start_tick < b.start_tick; });
    return out;
}

std::vector<PlanItem> anchor_routine(const PersonaSpec& p, long day) {
    std::vector<PlanItem> out;
    const int jitter = static_cast<int>(fnv1a64(p.name) % 4) * 15;
    out.push_back({at(day, kWakeHour, jitter), "home", "morning routine", false});
    const auto& anchors = p.daily_anchor_locations;
    if (!anchors.empty()) {
        const long first = at(day, 8, jitter);
        const long last = at(day, 20, 0);
        const long slot = (last - first) / static_cast<long>(anchors.size());
        for (std::size_t k = 0; k < anchors.size(); ++k) {
            const auto& loc = anchors[(k + static_cast<std::size_t>(day)) % anchors.size()];
            out.push_back({first + static_cast<long>(k) * slot, loc, "spend time at " + loc, false});
        }
    }
    out.push_back({at(day, 20, 0), "home", "evening at home", false});
    return with_sleep_blocks(std::move(out), day);
}

std::vector<PlanItem> with_sleep_blocks(std::vector<PlanItem> items, long day) {
    const long wake = at(day, kWakeHour, 0);
    const long sleep = at(day, kSleepHour, 0);
    std::vector<PlanItem> out;
    out.push_back({at(day, 0, 0), "home", "sleep", true});
    for (auto& it : items)
        if (it.start_tick >= wake && it.start_tick < sleep) out.push_back(std::move(it));
    out.push_back({sleep, "home", "sleep", true});
    std::stable_sort(out.begin(), out.end(), [](const PlanItem& a, const PlanItem& b) { return a.start_tick < b.start_tick; });
    return out;
}

std::string plan_prompt(const AgentState& a, const WorldMap& map, long day, bool reformat) {
    std::string s = memory_context(a) + "\n\nIt is the start of day " + std::to_string(day + 1) + ". Plan " +
                    a.persona.name + "'s day between 07:00 and 22:00. Known locations: home";
    for (const auto& [name, cells] : map.locations()) s += ", " + name;
    s += ".\nWrite one line per activity in the format HH:MM - location - intent.";
    if (reformat) s += "\nYour previous answer could not be read. Use exactly the format HH:MM - location - intent, nothing else.";
    return s;
}

PlanDayResult plan_day(const AgentState& agent, gateway::ModelGateway& gw, const WorldMap& map, long day,
                       std::uint64_t seed, const gateway::ContextFeatures& features) {
    PlanDayResult r;
    gateway::ChatRequest req;
    req.system_text = system_context(agent);
    req.purpose = gateway::Purpose::plan;
    req.features = features;
    for (int attempt = 0; attempt < 2; ++attempt) {
        req.user_text = plan_prompt(agent, map, day, attempt > 0);
        req.decoding = gateway::DecodingParams::generative(mix_seed({seed, static_cast<std::uint64_t>(attempt)}));
        auto items = parse_plan_text(gw.complete(req), day * kTicksPerDay, map);
        r.attempts = attempt + 1;
        if (!items.empty()) {
            r.parsed_items = static_cast<int>(items.size());
            r.plan = with_sleep_blocks(std::move(items), day);
            return r;
        }
    }
    r.fallback = true;
    r.plan = anchor_routine(agent.persona, day);
    return r;
}

}  // namespace igsim::world
