#include "igsim/gateway/scripted.hpp"

#include <algorithm>

#include "igsim/common/io.hpp"
#include "igsim/common/rng.hpp"

namespace igsim::gateway {

namespace {

ScriptedRule rule_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": rule must be an object");
    ScriptedRule r;
    if (j.contains("reply")) r.reply = j["reply"].get<std::string>();
    if (j.contains("hostile_propensity")) r.hostile_propensity = j["hostile_propensity"].get<double>();
    if (j.contains("engage_probability")) r.engage_probability = j["engage_probability"].get<double>();
    if (j.contains("turns")) r.turns = j["turns"].get<int>();
    if (j.contains("yes_if_contains")) r.yes_if_contains = j["yes_if_contains"].get<std::string>();
    r.likert_spread = j.value("likert_spread", 0);
    if (r.likert_spread < 0 || r.likert_spread > 3) throw ConfigError(where + ": likert_spread must lie in 0..3");
    if (j.contains("likert")) {
        const auto& l = j["likert"];
        if (l.is_number_integer()) r.likert["default"] = l.get<int>();
        else
            for (auto it = l.begin(); it != l.end(); ++it) r.likert[it.key()] = it.value().get<int>();
    }
    for (double p : {r.hostile_propensity.value_or(0.0), r.engage_probability.value_or(0.0)})
        if (p < 0.0 || p > 1.0) throw ConfigError(where + ": probabilities must lie in [0,1]");
    if (r.turns < 1 || r.turns > 8) throw ConfigError(where + ": turns must lie in 1..8");
    return r;
}

std::string fill(std::string tmpl, const ContextFeatures& f) {
    auto sub = [&](const std::string& key, const std::string& value) {
        for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key, pos + value.size()))
            tmpl.replace(pos, key.size(), value);
    };
    sub("{actor}", f.actor_name.empty() ? "Someone" : f.actor_name);
    sub("{target}", f.target_name.empty() ? "someone" : f.target_name);
    sub("{group}", f.target_group.empty() ? "the other group" : f.target_group);
    std::string place = f.location.empty() ? "town" : f.location == "home" ? "house" : f.location;
    std::replace(place.begin(), place.end(), '_', ' ');
    sub("{location}", place);
    return tmpl;
}

constexpr const char* kHostileActs[] = {
    "{actor} blocks {target}'s way and shouts insults at them. [HOSTILE]",
    "{actor} shoves {target} aside and tells them to get out of the {location}. [HOSTILE]",
    "{actor} mocks {target} loudly in front of everyone. [HOSTILE]",
};
constexpr const char* kNeutralActs[] = {
    "{actor} greets {target} and chats about the weather.",
    "{actor} helps {target} carry a box at the {location}.",
    "{actor} nods at {target} and goes on with their day.",
};
constexpr const char* kSoloActs[] = {
    "{actor} is busy with their routine at the {location}.",
    "{actor} takes a short break at the {location}.",
};
constexpr const char* kHostileTurns[] = {
    "People like you from {group} are ruining this town, {target}. [HOSTILE]",
    "I hate seeing your kind around here, {target}. Leave. [HOSTILE]",
};
constexpr const char* kNeutralTurns[] = {
    "Good to see you, {target}. How has your day been?",
    "The {location} is lovely today, isn't it, {target}?",
    "Thanks for the chat, {target}.",
};

template <std::size_t N>
const char* pick(const char* const (&arr)[N], std::uint64_t key) {
    return arr[splitmix64(key) % N];
}

}  // namespace

ScriptedProfile ScriptedProfile::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_object())
        throw ConfigError("scripted profile: missing 'rules' object");
    ScriptedProfile p;
    for (auto it = j["rules"].begin(); it != j["rules"].end(); ++it) {
        parse_purpose(it.key());
        for (auto c = it.value().begin(); c != it.value().end(); ++c) {
            const auto& key = c.key();
            if (key != "default" && key != "none" && key != "symbolic" && key != "realistic" && key != "both")
                throw ConfigError("scripted profile: unknown cell key '" + key + "' under " + it.key());
            p.rules_[it.key()][key] = rule_from_json(c.value(), "scripted profile " + it.key() + "/" + key);
        }
    }
    return p;
}

ScriptedProfile ScriptedProfile::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

void ScriptedProfile::set(Purpose purpose, const std::string& cell_key, ScriptedRule rule) {
    rules_[purpose_name(purpose)][cell_key] = std::move(rule);
}

const ScriptedRule& ScriptedProfile::lookup(Purpose purpose, const xdesign::ConditionCell& cell) const {
    const auto key = cell.threat_key();
    if (auto it = rules_.find(purpose_name(purpose)); it != rules_.end()) {
        if (auto r = it->second.find(key); r != it->second.end()) return r->second;
        if (auto r = it->second.find("default"); r != it->second.end()) return r->second;
    }
    throw ConfigError(std::string("scripted profile has no rule for purpose '") + purpose_name(purpose) +
                      "' in cell '" + key + "'");
}

BehaviorDraw scripted_behavior(const ContextFeatures& f, double hostile_propensity, std::uint64_t seed,
                               Purpose purpose) {
    const std::uint64_t key = mix_seed({seed, static_cast<std::uint64_t>(purpose), static_cast<std::uint64_t>(f.agent_index + 1),
                                        static_cast<std::uint64_t>(f.target_index + 1),
                                        static_cast<std::uint64_t>(f.tick), static_cast<std::uint64_t>(f.turn + 1)});
    BehaviorDraw d;
    if (purpose == Purpose::converse) {
        d.hostile = f.intergroup && unit_from_key(key) < hostile_propensity;
        d.text = fill(d.hostile ? pick(kHostileTurns, key ^ 1) : pick(kNeutralTurns, key ^ 1), f);
        return d;
    }
    if (f.target_index < 0) {
        d.text = fill(pick(kSoloActs, key ^ 1), f);
        return d;
    }
    d.hostile = f.intergroup && unit_from_key(key) < hostile_propensity;
    d.text = fill(d.hostile ? pick(kHostileActs, key ^ 1) : pick(kNeutralActs, key ^ 1), f);
    return d;
}

std::string ScriptedGateway::complete(const ChatRequest& req) {
    validate(req);
    const auto& rule = profile_.lookup(req.purpose, req.features.cell);
    const auto& f = req.features;
    switch (req.purpose) {
        case Purpose::act:
            if (rule.hostile_propensity)
                return scripted_behavior(f, *rule.hostile_propensity, req.decoding.seed, Purpose::act).text;
            break;
        case Purpose::converse:
            if (f.turn < 0 && rule.engage_probability) {
                const double u = unit_from_key(mix_seed({req.decoding.seed, fnv1a64("engage")}));
                return u < *rule.engage_probability ? "yes" : "no";
            }
            if (f.turn >= 0) {
                if (f.turn >= rule.turns) return "[END]";
                return scripted_behavior(f, rule.hostile_propensity.value_or(0.0), req.decoding.seed, Purpose::converse)
                    .text;
            }
            break;
        case Purpose::probe:
            if (!rule.likert.empty()) {
                auto it = rule.likert.find(f.scale);
                if (it == rule.likert.end()) it = rule.likert.find("default");
                if (it != rule.likert.end()) {
                    int v = it->second;
                    if (rule.likert_spread > 0) {
                        const double u = unit_from_key(mix_seed({req.decoding.seed, fnv1a64("likert")}));
                        v += static_cast<int>(u * (2 * rule.likert_spread + 1)) - rule.likert_spread;
                    }
                    return std::to_string(std::clamp(v, 1, 7));
                }
            }
            break;
        case Purpose::classify_hostile:
            if (rule.yes_if_contains) return req.user_text.find(*rule.yes_if_contains) != std::string::npos ? "yes" : "no";
            break;
        default:
            break;
    }
    if (rule.reply) return *rule.reply;
    throw ConfigError(std::string("scripted rule for '") + purpose_name(req.purpose) + "' in cell '" +
                      f.cell.threat_key() + "' does not cover this request (turn " + std::to_string(f.turn) +
                      ", scale '" + f.scale + "')");
}

}  // namespace igsim::gateway
