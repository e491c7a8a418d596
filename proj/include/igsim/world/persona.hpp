#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/world/map.hpp"

namespace igsim::world {

struct PersonaSpec {
    std::string name;
    int age = 0;
    std::string occupation;
    std::vector<std::string> traits;
    Cell home;
    std::vector<std::string> daily_anchor_locations;

    std::string describe() const;
};

/// Parses a roster and checks it against the map: unique names, walkable
/// homes and known anchor locations.
std::vector<PersonaSpec> personas_from_json(const nlohmann::json& j, const WorldMap& map);
std::vector<PersonaSpec> load_personas(const std::filesystem::path& path, const WorldMap& map);

}  // namespace igsim::world
