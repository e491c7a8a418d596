#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/gateway/scripted.hpp"
#include "igsim/world/map.hpp"
#include "igsim/world/persona.hpp"

namespace igsim::test {

/// Source-tree data directory (town map, roster, profile, plans).
std::filesystem::path data_dir();

/// Fresh empty directory under the build tree.
std::filesystem::path scratch_dir(const std::string& name);

/// 12x8 open map with a cafe, a park and a library.
world::WorldMap small_map();

/// Four personas with homes on small_map().
std::vector<world::PersonaSpec> small_roster(const world::WorldMap& map);

/// Scripted profile for tests: fallback plans, constant probe answer,
/// classifier keyed on the hostile marker.
gateway::ScriptedProfile test_profile(double propensity = 0.1, double engage = 0.3, int likert = 4);

std::vector<world::PersonaSpec> town_roster(const world::WorldMap& map);
world::WorldMap town_map();

}  // namespace igsim::test
