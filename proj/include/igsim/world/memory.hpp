#pragma once

#include <string>
#include <vector>

namespace igsim::world {

enum class MemoryKind { percept, action, conversation, reflection, belief };

const char* memory_kind_name(MemoryKind k);
MemoryKind parse_memory_kind(const std::string& s);

struct MemoryEvent {
    long tick = 0;
    MemoryKind kind = MemoryKind::percept;
    std::string text;
    double salience = 0.5;
};

struct PlanItem {
    long start_tick = 0;
    std::string location;
    std::string intent;
    bool sleep = false;
};

}  // namespace igsim::world
