#pragma once

#include <optional>
#include <string>

namespace igsim::world {

enum class EventKind { action, conversation_turn };

inline const char* event_kind_name(EventKind k) { return k == EventKind::action ? "action" : "conversation_turn"; }

struct EventRecord {
    std::string run_id;
    long tick = 0;
    long sim_hour = 0;
    std::string initiator;
    int initiator_index = -1;
    std::optional<std::string> target;
    int target_index = -1;
    std::string initiator_group;
    std::optional<std::string> target_group;
    EventKind kind = EventKind::action;
    std::string text;
    std::string location;
    bool social = true;             // false for solitary scheduled activity
    long conversation_id = -1;
    int turn = -1;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct ProbeRecord {
    std::string run_id;
    long tick = 0;
    std::string agent;
    int agent_index = -1;
    std::string scale_id;
    std::string item_id;
    std::optional<int> response;  // missing after two unparseable replies

    friend bool operator==(const ProbeRecord&, const ProbeRecord&) = default;
};

}  // namespace igsim::world
