#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "igsim/gateway/types.hpp"
#include "igsim/world/agent.hpp"
#include "igsim/world/map.hpp"
#include "igsim/world/records.hpp"
#include "igsim/xdesign/assignment.hpp"

namespace igsim::world {

struct WorldConfig {
    std::string run_id = "run";
    xdesign::ConditionCell cell;
    std::uint64_t seed = 0;
    long horizon_ticks = 0;
    bool probes = true;
    std::vector<std::string> probe_scales;  // empty: all scales
    int act_interval = 30;
    std::size_t memory_k = 30;
    int max_turns = 8;
    std::size_t memory_cap = 400;
};

struct StepOutput {
    std::vector<EventRecord> events;
    std::vector<ProbeRecord> probes;
};

struct Conversation {
    long id = 0;
    int a = 0;  // initiator
    int b = 0;
    int turn = 0;
    bool ended = false;
    std::vector<std::string> lines;
};

class World {
public:
    World(WorldMap map, std::vector<PersonaSpec> personas, WorldConfig cfg);

    /// Advances one tick. Throws ValidationError("horizon reached") at the
    /// horizon; GatewayError propagates and leaves the state mid-tick.
    StepOutput step(gateway::ModelGateway& gw);

    long tick() const noexcept { return tick_; }
    long horizon() const noexcept { return cfg_.horizon_ticks; }
    bool done() const noexcept { return tick_ >= cfg_.horizon_ticks; }

    const WorldConfig& config() const noexcept { return cfg_; }
    const WorldMap& map() const noexcept { return map_; }
    const std::vector<AgentState>& agents() const noexcept { return agents_; }
    const xdesign::AssignmentResult& assignment() const noexcept { return assignment_; }
    const std::vector<Conversation>& conversations() const noexcept { return conversations_; }

    /// Key shared by agents that can see each other: the named location, else
    /// the exact cell.
    std::string place_key(Cell c) const;

    /// Opaque snapshot of the mutable state (tick, agents, conversations).
    std::string snapshot() const;
    void restore(const std::string& snapshot);

    /// Places an agent directly; for fixtures.
    void set_location(int agent, Cell c);
    void set_plan(int agent, std::vector<PlanItem> plan);

private:
    gateway::ContextFeatures features(int agent, int target) const;
    std::uint64_t call_seed(gateway::Purpose p, int agent, std::uint64_t extra) const;
    const std::vector<int>& field_for(const AgentState& a, const std::string& location);
    void remember(AgentState& a, MemoryEvent ev);
    bool asleep(const AgentState& a) const;

    void day_boundary(gateway::ModelGateway& gw);
    void conversation_turn(Conversation& c, gateway::ModelGateway& gw, StepOutput& out);
    void act(int i, gateway::ModelGateway& gw, StepOutput& out);
    void maybe_probe(int i, gateway::ModelGateway& gw, StepOutput& out);
    EventRecord base_event(int initiator, int target) const;
    std::string location_label(const AgentState& a) const;

    WorldMap map_;
    WorldConfig cfg_;
    std::vector<AgentState> agents_;
    xdesign::AssignmentResult assignment_;
    std::vector<Conversation> conversations_;
    std::vector<long> probe_hour_;
    long tick_ = 0;
    long next_conversation_ = 0;
    std::map<std::string, std::vector<int>> fields_;
};

}  // namespace igsim::world
