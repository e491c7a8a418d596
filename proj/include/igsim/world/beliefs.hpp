#pragma once

#include <string>
#include <vector>

#include "igsim/world/memory.hpp"
#include "igsim/xdesign/condition.hpp"

namespace igsim::world {

/// The four belief events for an agent of `group_label` ("A", "B",
/// "Group A", "Group B") under `cell`. Unknown labels raise ConfigError.
std::vector<MemoryEvent> inject_beliefs(const std::string& agent_name, const std::string& group_label,
                                        const xdesign::ConditionCell& cell, long tick);

}  // namespace igsim::world
