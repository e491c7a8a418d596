#pragma once

#include <cstddef>
#include <string>

#include "igsim/world/agent.hpp"

namespace igsim::world {

inline constexpr std::size_t kContextMemory = 30;

/// Persona, identity and every belief statement.
std::string system_context(const AgentState& agent);

/// The most recent `k` memory events, oldest first.
std::string memory_context(const AgentState& agent, std::size_t k = kContextMemory);

std::string clock_text(long tick);

}  // namespace igsim::world
