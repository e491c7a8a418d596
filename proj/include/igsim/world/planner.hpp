#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igsim/gateway/types.hpp"
#include "igsim/world/agent.hpp"
#include "igsim/world/map.hpp"

namespace igsim::world {

inline constexpr int kWakeHour = 7;
inline constexpr int kSleepHour = 22;

/// Parses "HH:MM - location - intent" lines. Lines that do not match are
/// skipped; unknown locations become "home". Times are offsets from
/// `day_start_tick`.
std::vector<PlanItem> parse_plan_text(const std::string& text, long day_start_tick, const WorldMap& map);

/// Deterministic routine built from the persona's anchor locations.
std::vector<PlanItem> anchor_routine(const PersonaSpec& persona, long day);

/// Adds sleep blocks at 00:00 and 22:00 at home, drops waking items outside
/// [07:00, 22:00) and sorts by start tick.
std::vector<PlanItem> with_sleep_blocks(std::vector<PlanItem> items, long day);

struct PlanDayResult {
    std::vector<PlanItem> plan;
    int parsed_items = 0;
    int attempts = 0;
    bool fallback = false;
};

std::string plan_prompt(const AgentState& agent, const WorldMap& map, long day, bool reformat);

PlanDayResult plan_day(const AgentState& agent, gateway::ModelGateway& gw, const WorldMap& map, long day,
                       std::uint64_t seed, const gateway::ContextFeatures& features);

}  // namespace igsim::world
