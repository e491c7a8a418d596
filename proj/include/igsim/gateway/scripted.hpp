#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "igsim/gateway/types.hpp"

namespace igsim::gateway {

/// How the scripted backend answers one (purpose, cell) combination.
struct ScriptedRule {
    std::optional<std::string> reply;          // constant reply
    std::optional<double> hostile_propensity;  // act / converse turns
    std::optional<double> engage_probability;  // converse engage question
    int turns = 4;                             // conversation length
    std::optional<std::string> yes_if_contains;  // classify_hostile
    std::map<std::string, int> likert;         // probe: scale id -> response, "default" fallback
    int likert_spread = 0;                     // probe: uniform jitter of +-spread around the response
};

/// Rules keyed by purpose tag, then by threat key ("none", "symbolic",
/// "realistic", "both") with "default" as fallback.
class ScriptedProfile {
public:
    static ScriptedProfile from_json(const nlohmann::json& j);
    static ScriptedProfile load(const std::filesystem::path& path);

    /// Throws ConfigError naming the purpose and cell when nothing matches.
    const ScriptedRule& lookup(Purpose purpose, const xdesign::ConditionCell& cell) const;
    bool has(Purpose purpose) const { return rules_.count(purpose_name(purpose)) != 0; }

    void set(Purpose purpose, const std::string& cell_key, ScriptedRule rule);

private:
    std::map<std::string, std::map<std::string, ScriptedRule>> rules_;
};

struct BehaviorDraw {
    std::string text;
    bool hostile = false;
};

/// Hostile draw with the given propensity and the matching templated text.
/// Pure in all inputs; only intergroup contexts can draw hostile.
BehaviorDraw scripted_behavior(const ContextFeatures& features, double hostile_propensity, std::uint64_t seed,
                               Purpose purpose = Purpose::act);

/// Deterministic backend for tests and desk-scale experiments.
class ScriptedGateway : public ModelGateway {
public:
    explicit ScriptedGateway(ScriptedProfile profile) : profile_(std::move(profile)) {}
    std::string complete(const ChatRequest& req) override;
    const ScriptedProfile& profile() const noexcept { return profile_; }

private:
    ScriptedProfile profile_;
};

/// Token the scripted backend places in hostile texts.
inline constexpr const char* kHostileMarker = "[HOSTILE]";

}  // namespace igsim::gateway
