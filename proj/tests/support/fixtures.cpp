#include "fixtures.hpp"

#include "igsim/common/io.hpp"

namespace igsim::test {

namespace fs = std::filesystem;

fs::path data_dir() { return IGSIM_SOURCE_DIR "/data"; }

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::path(IGSIM_SCRATCH_DIR) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

world::WorldMap small_map() {
    nlohmann::json j = {{"width", 12},
                        {"height", 8},
                        {"walkable", {"............", "............", "....##......", "....##......",
                                      "............", "............", "............", "............"}},
                        {"named_locations",
                         {{"cafe", {{8, 1}, {9, 1}}}, {"park", {{8, 6}, {9, 6}, {10, 6}}}, {"library", {{1, 6}}}}}};
    return world::WorldMap::from_json(j);
}

std::vector<world::PersonaSpec> small_roster(const world::WorldMap& map) {
    nlohmann::json j = nlohmann::json::array();
    const char* names[] = {"Ada Stone", "Ben Reyes", "Cora Vale", "Dev Anand"};
    const int homes[][2] = {{0, 0}, {2, 0}, {0, 3}, {11, 3}};
    for (int i = 0; i < 4; ++i)
        j.push_back({{"name", names[i]},
                     {"age", 30 + i},
                     {"occupation", "clerk"},
                     {"traits", {"calm"}},
                     {"home", {homes[i][0], homes[i][1]}},
                     {"daily_anchor_locations", {"cafe", "park"}}});
    return world::personas_from_json(j, map);
}

gateway::ScriptedProfile test_profile(double propensity, double engage, int likert) {
    using gateway::Purpose;
    gateway::ScriptedProfile p;
    gateway::ScriptedRule plan;
    plan.reply = "";
    p.set(Purpose::plan, "default", plan);
    gateway::ScriptedRule reflect;
    reflect.reply = "A quiet day.";
    p.set(Purpose::reflect, "default", reflect);
    gateway::ScriptedRule act;
    act.hostile_propensity = propensity;
    p.set(Purpose::act, "default", act);
    gateway::ScriptedRule conv;
    conv.engage_probability = engage;
    conv.hostile_propensity = propensity;
    conv.turns = 3;
    p.set(Purpose::converse, "default", conv);
    gateway::ScriptedRule probe;
    probe.likert["default"] = likert;
    p.set(Purpose::probe, "default", probe);
    gateway::ScriptedRule cls;
    cls.yes_if_contains = gateway::kHostileMarker;
    p.set(Purpose::classify_hostile, "default", cls);
    return p;
}

world::WorldMap town_map() { return world::WorldMap::load(data_dir() / "town_map.json"); }

std::vector<world::PersonaSpec> town_roster(const world::WorldMap& map) {
    return world::load_personas(data_dir() / "personas.json", map);
}

}  // namespace igsim::test
