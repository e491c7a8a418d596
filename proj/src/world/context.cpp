#include "igsim/world/context.hpp"

#include "igsim/world/clock.hpp"

namespace igsim::world {

const PlanItem* AgentState::current_item(long tick) const {
    const PlanItem* cur = nullptr;
    for (const auto& it : plan) {
        if (it.start_tick > clock_tick(tick)) break;
        cur = &it;
    }
    return cur;
}

std::string clock_text(long tick) {
    const long tod = tick_of_day(tick);
    const long minutes = tod * kSecondsPerTick / 60;
    const long hh = minutes / 60, mm = minutes % 60;
    std::string s = "Day " + std::to_string(day_of(tick) + 1) + ", 00:00";
    const auto n = s.size();
    s[n - 5] = static_cast<char>('0' + hh / 10);
    s[n - 4] = static_cast<char>('0' + hh % 10);
    s[n - 2] = static_cast<char>('0' + mm / 10);
    s[n - 1] = static_cast<char>('0' + mm % 10);
    return s;
}

std::string system_context(const AgentState& a) {
    std::string s = a.persona.describe();
    s += "\n" + a.identity;
    for (const auto& b : a.beliefs) s += "\n" + b;
    return s;
}

std::string memory_context(const AgentState& a, std::size_t k) {
    std::string s = "Recent memories of " + a.persona.name + ":";
    const std::size_t begin = a.memory.size() > k ? a.memory.size() - k : 0;
    for (std::size_t i = begin; i < a.memory.size(); ++i) {
        const auto& m = a.memory[i];
        s += "\n- [" + clock_text(m.tick) + "] " + m.text;
    }
    return s;
}

}  // namespace igsim::world
