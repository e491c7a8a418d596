#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace igsim::world {

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Grid town. Row strings use '.' (or any char other than '#') for walkable
/// cells and '#' for blocked ones; row 0 is the top (north) edge.
class WorldMap {
public:
    WorldMap(int width, int height, std::vector<bool> walkable, std::map<std::string, std::vector<Cell>> locations);

    static WorldMap from_json(const nlohmann::json& j);
    static WorldMap load(const std::filesystem::path& path);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
    bool walkable(Cell c) const noexcept { return in_bounds(c) && walkable_[index(c)]; }
    const std::map<std::string, std::vector<Cell>>& locations() const noexcept { return locations_; }
    bool has_location(const std::string& name) const { return locations_.count(name) != 0; }
    const std::vector<Cell>& location(const std::string& name) const;

    /// Name of the named location containing c, or "" when none does.
    const std::string& location_at(Cell c) const;

    /// BFS distance field to the target set; -1 marks unreachable cells.
    std::vector<int> distance_field(const std::vector<Cell>& targets) const;

    /// Next cell on a shortest path using the field; neighbours are tried in
    /// N, E, S, W order. Returns `from` when already at distance 0.
    Cell next_step(Cell from, const std::vector<int>& field) const;

    std::size_t index(Cell c) const noexcept { return static_cast<std::size_t>(c.y) * width_ + c.x; }

private:
    int width_;
    int height_;
    std::vector<bool> walkable_;
    std::map<std::string, std::vector<Cell>> locations_;
    std::vector<int> location_of_;  // index into names_, -1 for none
    std::vector<std::string> names_;
};

inline constexpr Cell kNeighbourOffsets[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};

}  // namespace igsim::world
