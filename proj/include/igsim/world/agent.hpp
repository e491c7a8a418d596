#pragma once

#include <string>
#include <vector>

#include "igsim/world/memory.hpp"
#include "igsim/world/persona.hpp"
#include "igsim/xdesign/condition.hpp"

namespace igsim::world {

struct AgentState {
    PersonaSpec persona;
    int index = 0;
    xdesign::Group group = xdesign::Group::A;
    Cell location;
    std::vector<MemoryEvent> memory;
    std::vector<PlanItem> plan;

    std::string identity;              // minimal-group statement
    std::vector<std::string> beliefs;  // the four condition statements
    long conversation = -1;            // active conversation id
    unsigned long rotation = 0;        // target rotation counter
    std::vector<std::string> last_seen;

    /// Plan item in force at simulation tick `tick`.
    const PlanItem* current_item(long tick) const;
};

}  // namespace igsim::world
