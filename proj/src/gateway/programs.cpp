#include "igsim/gateway/programs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "igsim/common/rng.hpp"

namespace igsim::gateway {

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

constexpr const char* kDetectionTemplate =
    "Analyze the description of an action between a member of GROUP_A and a member \n"
    "of GROUP_B and determine whether the action is hostile, defined as aggressive,\n"
    "harmful, or hateful behavior (e.g., physical or verbal attacks, threats, \n"
    "harassment, trolling, or discriminating against others).\n"
    "\n"
    "Here is the action:\n"
    "[ACTION]\n"
    "\n"
    "Respond only with \"yes\" or \"no\".";

constexpr const char* kRatingTemplate =
    "You are an expert evaluator of intergroup behavior.\n"
    "\n"
    "**Scenario:**\n"
    "{scenario}\n"
    "\n"
    "**Person's behavioral response:**\n"
    "{response}\n"
    "\n"
    "**Task:**\n"
    "Evaluate the hostility level of this behavioral response toward Group B.\n"
    "\n"
    "Provide ONLY valid JSON:\n"
    "{\n"
    "    \"rating\": <float 1.0-5.0>,\n"
    "    \"behavior_type\": \"<friendly|neutral|verbal_attack|social_exclusion|physical_threat|discrimination|sabotage>\",\n"
    "    \"specific_actions\": [\"<action1>\", \"<action2>\"],\n"
    "    \"reasoning\": \"<brief explanation>\",\n"
    "    \"is_hostile\": <true|false>\n"
    "}\n"
    "\n"
    "**Rating scale:**\n"
    "1.0 = Friendly/supportive\n"
    "2.0 = Neutral\n"
    "3.0 = Mildly hostile (avoidance)\n"
    "4.0 = Moderately hostile (verbal aggression)\n"
    "5.0 = Extremely hostile (threats/violence)\n"
    "\n"
    "Respond with JSON only.";

constexpr const char* kRaterSystem = "You are a careful annotator. Follow the output format exactly.";

}  // namespace

std::string hostile_detection_prompt(const std::string& action_text, const std::string& actor_group,
                                     const std::string& target_group) {
    std::string p = kDetectionTemplate;
    replace_all(p, "[ACTION]", action_text);
    replace_all(p, "GROUP_A", actor_group);
    replace_all(p, "GROUP_B", target_group);
    return p;
}

std::string hostility_rating_prompt(const std::string& scenario, const std::string& response) {
    std::string p = kRatingTemplate;
    // response first so braces inside the scenario are never re-expanded
    replace_all(p, "{response}", response);
    replace_all(p, "{scenario}", scenario);
    return p;
}

std::optional<bool> normalize_yes_no(const std::string& reply) {
    std::string s;
    for (unsigned char c : reply)
        if (std::isalpha(c)) s.push_back(static_cast<char>(std::tolower(c)));
        else if (!std::isspace(c) && !std::ispunct(c)) return std::nullopt;
    if (s == "yes") return true;
    if (s == "no") return false;
    return std::nullopt;
}

ClassifyOutcome classify_hostile(ModelGateway& gw, const std::string& action_text, const std::string& actor_group,
                                 const std::string& target_group, std::uint64_t seed,
                                 const ContextFeatures& features) {
    if (actor_group == target_group)
        throw ValidationError("classify_hostile applies to intergroup events; both groups are '" + actor_group + "'");
    ChatRequest req;
    req.system_text = kRaterSystem;
    req.user_text = hostile_detection_prompt(action_text, actor_group, target_group);
    req.purpose = Purpose::classify_hostile;
    req.features = features;
    ClassifyOutcome out;
    std::string last;
    for (int attempt = 0; attempt < 2; ++attempt) {
        req.decoding = DecodingParams::deterministic(mix_seed({seed, static_cast<std::uint64_t>(attempt)}));
        last = gw.complete(req);
        out.attempts = attempt + 1;
        if (auto v = normalize_yes_no(last)) {
            out.hostile = v;
            return out;
        }
    }
    out.error = "non-conforming classifier reply: '" + last.substr(0, 80) + "'";
    return out;
}

HostilityRating parse_hostility_rating(const std::string& reply) {
    const auto b = reply.find('{');
    const auto e = reply.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) throw RatingError("no JSON object in rater reply");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(reply.substr(b, e - b + 1));
    } catch (const nlohmann::json::exception& ex) {
        throw RatingError(std::string("malformed rater JSON: ") + ex.what());
    }
    if (!j.contains("rating") || !j["rating"].is_number()) throw RatingError("rater JSON lacks numeric 'rating'");
    HostilityRating r;
    r.rating = j["rating"].get<double>();
    if (!std::isfinite(r.rating)) throw RatingError("rater rating is not finite");
    if (r.rating < 1.0 || r.rating > 5.0) {
        std::ostringstream os;
        os << "rating " << r.rating << " clamped to [1,5]";
        r.warnings.push_back(os.str());
        r.rating = std::clamp(r.rating, 1.0, 5.0);
    }
    if (j.contains("behavior_type") && j["behavior_type"].is_string()) r.behavior_type = j["behavior_type"];
    if (j.contains("reasoning") && j["reasoning"].is_string()) r.reasoning = j["reasoning"];
    if (j.contains("specific_actions") && j["specific_actions"].is_array())
        for (const auto& a : j["specific_actions"])
            if (a.is_string()) r.specific_actions.push_back(a);
    r.is_hostile = r.rating >= kHostileThreshold;
    if (j.contains("is_hostile") && j["is_hostile"].is_boolean() && j["is_hostile"].get<bool>() != r.is_hostile)
        r.warnings.push_back("rater is_hostile disagrees with rating threshold; threshold used");
    return r;
}

HostilityRating rate_hostility(ModelGateway& gw, const std::string& scenario, const std::string& response,
                               std::uint64_t seed, const ContextFeatures& features) {
    if (scenario.empty() || response.empty()) throw ValidationError("rate_hostility needs non-empty scenario and response");
    ChatRequest req;
    req.system_text = kRaterSystem;
    req.user_text = hostility_rating_prompt(scenario, response);
    req.purpose = Purpose::rate_hostility;
    req.features = features;
    std::string err;
    for (int attempt = 0; attempt < 2; ++attempt) {
        req.decoding = DecodingParams::deterministic(mix_seed({seed, static_cast<std::uint64_t>(attempt)}));
        try {
            return parse_hostility_rating(gw.complete(req));
        } catch (const RatingError& e) {
            err = e.what();
        }
    }
    throw RatingError("rating failed twice: " + err);
}

}  // namespace igsim::gateway
