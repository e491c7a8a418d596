#include "igsim/world/persona.hpp"

#include <set>

#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"

namespace igsim::world {

std::string PersonaSpec::describe() const {
    std::string s = name + " is " + std::to_string(age) + " years old and works as " + occupation + ".";
    if (!traits.empty()) {
        s += " Traits:";
        for (std::size_t i = 0; i < traits.size(); ++i) s += (i ? ", " : " ") + traits[i];
        s += ".";
    }
    return s;
}

std::vector<PersonaSpec> personas_from_json(const nlohmann::json& j, const WorldMap& map) {
    if (!j.is_array()) throw ConfigError("persona roster must be a JSON list");
    std::vector<PersonaSpec> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto where = "persona[" + std::to_string(i) + "]";
        const auto& e = j[i];
        PersonaSpec p;
        p.name = require<std::string>(e, "name", where);
        p.age = require<int>(e, "age", where);
        p.occupation = require<std::string>(e, "occupation", where);
        p.traits = require<std::vector<std::string>>(e, "traits", where);
        const auto& home = e.contains("home") ? e["home"] : throw SchemaError("home", where + ": missing 'home'");
        if (!home.is_array() || home.size() != 2) throw SchemaError("home", where + ": 'home' must be [x,y]");
        p.home = {home[0].get<int>(), home[1].get<int>()};
        p.daily_anchor_locations = require<std::vector<std::string>>(e, "daily_anchor_locations", where);
        if (p.name.empty()) throw ConfigError(where + ": empty name");
        if (!seen.insert(p.name).second) throw ConfigError("duplicate persona name '" + p.name + "'");
        if (!map.walkable(p.home)) throw ConfigError(where + " (" + p.name + "): home is not a walkable cell");
        for (const auto& a : p.daily_anchor_locations)
            if (a != "home" && !map.has_location(a))
                throw ConfigError(where + " (" + p.name + "): unknown anchor location '" + a + "'");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PersonaSpec> load_personas(const std::filesystem::path& path, const WorldMap& map) {
    return personas_from_json(load_json(path), map);
}

}  // namespace igsim::world
