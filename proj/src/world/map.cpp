#include "igsim/world/map.hpp"

#include <deque>

#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"

namespace igsim::world {

WorldMap::WorldMap(int width, int height, std::vector<bool> walkable,
                   std::map<std::string, std::vector<Cell>> locations)
    : width_(width), height_(height), walkable_(std::move(walkable)), locations_(std::move(locations)) {
    if (width_ <= 0 || height_ <= 0) throw ConfigError("map: width and height must be positive");
    if (walkable_.size() != static_cast<std::size_t>(width_) * height_)
        throw ConfigError("map: walkable grid does not match width x height");
    if (locations_.empty()) throw ConfigError("map: no named locations");
    if (locations_.count("home")) throw ConfigError("map: 'home' is reserved for persona homes");
    location_of_.assign(walkable_.size(), -1);
    for (const auto& [name, cells] : locations_) {
        if (cells.empty()) throw ConfigError("map: location '" + name + "' has no cells");
        const int id = static_cast<int>(names_.size());
        names_.push_back(name);
        for (auto c : cells) {
            if (!this->walkable(c))
                throw ConfigError("map: location '" + name + "' has non-walkable cell (" + std::to_string(c.x) + "," +
                                  std::to_string(c.y) + ")");
            if (location_of_[index(c)] >= 0 && location_of_[index(c)] != id)
                throw ConfigError("map: cell shared by locations '" + names_[location_of_[index(c)]] + "' and '" + name + "'");
            location_of_[index(c)] = id;
        }
    }
    Cell start{-1, -1};
    std::size_t n_walkable = 0;
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            if (walkable_[index({x, y})]) {
                if (n_walkable++ == 0) start = {x, y};
            }
    const auto field = distance_field({start});
    for (std::size_t i = 0; i < walkable_.size(); ++i)
        if (walkable_[i] && field[i] < 0)
            throw ConfigError("map: walkable cells are not connected (cell " + std::to_string(i % width_) + "," +
                              std::to_string(i / width_) + " unreachable)");
}

WorldMap WorldMap::from_json(const nlohmann::json& j) {
    const int w = require<int>(j, "width", "map");
    const int h = require<int>(j, "height", "map");
    const auto rows = require<std::vector<std::string>>(j, "walkable", "map");
    if (static_cast<int>(rows.size()) != h) throw ConfigError("map: walkable has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(h));
    std::vector<bool> grid;
    grid.reserve(static_cast<std::size_t>(w) * h);
    for (std::size_t y = 0; y < rows.size(); ++y) {
        if (static_cast<int>(rows[y].size()) != w) throw ConfigError("map: row " + std::to_string(y) + " has wrong width");
        for (char ch : rows[y]) grid.push_back(ch != '#');
    }
    if (!j.contains("named_locations") || !j["named_locations"].is_object())
        throw SchemaError("named_locations", "map: missing 'named_locations' object");
    std::map<std::string, std::vector<Cell>> locs;
    for (auto it = j["named_locations"].begin(); it != j["named_locations"].end(); ++it) {
        auto& cells = locs[it.key()];
        for (const auto& c : it.value()) {
            if (!c.is_array() || c.size() != 2) throw ConfigError("map: location '" + it.key() + "' cells must be [x,y]");
            cells.push_back({c[0].get<int>(), c[1].get<int>()});
        }
    }
    return WorldMap(w, h, std::move(grid), std::move(locs));
}

WorldMap WorldMap::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

const std::vector<Cell>& WorldMap::location(const std::string& name) const {
    auto it = locations_.find(name);
    if (it == locations_.end()) throw ConfigError("map: unknown location '" + name + "'");
    return it->second;
}

const std::string& WorldMap::location_at(Cell c) const {
    static const std::string none;
    if (!in_bounds(c)) return none;
    const int id = location_of_[index(c)];
    return id < 0 ? none : names_[id];
}

std::vector<int> WorldMap::distance_field(const std::vector<Cell>& targets) const {
    std::vector<int> dist(walkable_.size(), -1);
    std::deque<Cell> queue;
    for (auto t : targets)
        if (walkable(t) && dist[index(t)] < 0) {
            dist[index(t)] = 0;
            queue.push_back(t);
        }
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (auto off : kNeighbourOffsets) {
            const Cell n{c.x + off.x, c.y + off.y};
            if (walkable(n) && dist[index(n)] < 0) {
                dist[index(n)] = dist[index(c)] + 1;
                queue.push_back(n);
            }
        }
    }
    return dist;
}

Cell WorldMap::next_step(Cell from, const std::vector<int>& field) const {
    const int d = field[index(from)];
    if (d <= 0) return from;
    for (auto off : kNeighbourOffsets) {
        const Cell n{from.x + off.x, from.y + off.y};
        if (walkable(n) && field[index(n)] == d - 1) return n;
    }
    return from;
}

}  // namespace igsim::world
