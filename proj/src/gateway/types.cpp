#include "igsim/gateway/types.hpp"

namespace igsim::gateway {

namespace {

struct PurposeName {
    Purpose p;
    const char* name;
};

constexpr PurposeName kNames[] = {
    {Purpose::plan, "plan"},
    {Purpose::act, "act"},
    {Purpose::converse, "converse"},
    {Purpose::probe, "probe"},
    {Purpose::classify_hostile, "classify_hostile"},
    {Purpose::rate_hostility, "rate_hostility"},
    {Purpose::reflect, "reflect"},
};

}  // namespace

const char* purpose_name(Purpose p) {
    for (const auto& n : kNames)
        if (n.p == p) return n.name;
    return "?";
}

Purpose parse_purpose(const std::string& name) {
    for (const auto& n : kNames)
        if (name == n.name) return n.p;
    throw ConfigError("unknown purpose tag '" + name + "'");
}

void validate(const ChatRequest& req) {
    if (req.system_text.empty()) throw ValidationError(std::string("empty system text for ") + purpose_name(req.purpose));
    if (req.user_text.empty()) throw ValidationError(std::string("empty user text for ") + purpose_name(req.purpose));
}

}  // namespace igsim::gateway
