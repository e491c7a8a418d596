#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "igsim/gateway/types.hpp"
#include "igsim/world/agent.hpp"
#include "igsim/world/records.hpp"

namespace igsim::world {

struct ProbeItem {
    std::string scale_id;
    std::string item_id;
    std::string text;
};

/// identification, bias, trust, collaboration, dehumanization,
/// threat_realistic, threat_symbolic.
const std::vector<std::string>& probe_scales();

/// Items of a scale with the agent's own group as <Group 1> and the other
/// group as <Group 2>. Unknown scales raise ConfigError.
std::vector<ProbeItem> scale_items(const std::string& scale_id, xdesign::Group own);

/// Accepts a bare number, a number with trailing text or punctuation, a
/// parenthesized number after an anchor ("totally agree (7)") and the three
/// anchor phrases alone. Returns nullopt for anything else or out-of-range
/// values.
std::optional<int> parse_likert(const std::string& reply);

std::string probe_prompt(const AgentState& agent, const ProbeItem& item);

/// Administers one scale on a copy of the agent. The agent itself is never
/// touched; `agent` is taken by value to make that explicit.
std::vector<ProbeRecord> run_probe(AgentState agent, const std::string& scale_id, gateway::ModelGateway& gw,
                                   std::uint64_t seed, const gateway::ContextFeatures& features,
                                   const std::string& run_id = "");

}  // namespace igsim::world
