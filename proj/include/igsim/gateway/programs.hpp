#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igsim/gateway/types.hpp"

namespace igsim::gateway {

std::string hostile_detection_prompt(const std::string& action_text, const std::string& actor_group,
                                     const std::string& target_group);

std::string hostility_rating_prompt(const std::string& scenario, const std::string& response);

/// "yes"/"no" after lowercasing and stripping punctuation and whitespace;
/// nullopt for anything else.
std::optional<bool> normalize_yes_no(const std::string& reply);

struct ClassifyOutcome {
    std::optional<bool> hostile;  // nullopt: unlabeled
    std::string error;            // annotation error when unlabeled
    int attempts = 0;
};

/// Asks whether an intergroup action is hostile. Throws ValidationError when
/// both groups are equal.
ClassifyOutcome classify_hostile(ModelGateway& gw, const std::string& action_text, const std::string& actor_group,
                                 const std::string& target_group, std::uint64_t seed,
                                 const ContextFeatures& features = {});

struct HostilityRating {
    double rating = 0.0;
    std::string behavior_type;
    bool is_hostile = false;
    std::string reasoning;
    std::vector<std::string> specific_actions;
    std::vector<std::string> warnings;
};

class RatingError : public Error {
public:
    using Error::Error;
};

inline constexpr double kHostileThreshold = 3.0;

/// Parses a rater reply; throws RatingError when no JSON object with a
/// numeric rating can be found.
HostilityRating parse_hostility_rating(const std::string& reply);

HostilityRating rate_hostility(ModelGateway& gw, const std::string& scenario, const std::string& response,
                               std::uint64_t seed, const ContextFeatures& features = {});

}  // namespace igsim::gateway
