#include "igsim/world/beliefs.hpp"

#include "igsim/common/errors.hpp"

namespace igsim::world {

const char* memory_kind_name(MemoryKind k) {
    switch (k) {
        case MemoryKind::percept: return "percept";
        case MemoryKind::action: return "action";
        case MemoryKind::conversation: return "conversation";
        case MemoryKind::reflection: return "reflection";
        case MemoryKind::belief: return "belief";
    }
    return "?";
}

MemoryKind parse_memory_kind(const std::string& s) {
    for (auto k : {MemoryKind::percept, MemoryKind::action, MemoryKind::conversation, MemoryKind::reflection,
                   MemoryKind::belief})
        if (s == memory_kind_name(k)) return k;
    throw ConfigError("unknown memory kind '" + s + "'");
}

std::vector<MemoryEvent> inject_beliefs(const std::string& agent_name, const std::string& group_label,
                                        const xdesign::ConditionCell& cell, long tick) {
    const auto own = xdesign::parse_group(group_label);
    std::vector<MemoryEvent> out;
    for (const auto& t : xdesign::condition_statement_set(cell, xdesign::group_name(xdesign::other(own))))
        out.push_back({tick, MemoryKind::belief, t.render(agent_name), 1.0});
    return out;
}

}  // namespace igsim::world
