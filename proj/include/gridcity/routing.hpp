#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridcity/world.hpp"

namespace gridcity {

enum class Direction : uint8_t { north, east, south, west };

Direction opposite(Direction d);
std::string_view direction_name(Direction d);
std::optional<Direction> direction_from_name(std::string_view name);
bool direction_is_vertical(Direction d);

struct PathStep {
    std::string road;     // road id; generated steps always reference real roads
    Direction direction = Direction::north;
    double length = 0.0;  // km; integer-valued in generated data, reals accepted

    bool operator==(const PathStep&) const = default;
};

struct Trajectory {
    std::string start;  // poi id
    std::string end;
    std::vector<PathStep> steps;       // maximally merged: consecutive directions differ
    std::vector<Coordinate> nodes;     // every lattice point traversed, start..end
    double cost = 0.0;                 // total travel time
};

struct MoveResult {
    Coordinate position;
    bool clamped = false;  // motion hit the grid boundary and was truncated
};

struct Simulation {
    Coordinate end;
    std::vector<Coordinate> trace;  // start, every lattice point crossed, end
    bool clamped = false;
};

/// Displace origin by step.length km in step.direction, clamped to the grid.
/// Motion is simulated even from off-road origins; clamping replaces failure.
MoveResult move_along_road(const GridWorld& world, Coordinate origin, const PathStep& step);

/// Crossing point of two roads; empty for parallel or identical roads.
/// Throws unknown-road.
std::optional<Coordinate> find_intersection(const GridWorld& world, std::string_view road_a,
                                            std::string_view road_b);

/// All (road id, direction) pairs legal from `position`: the position lies on
/// the road and at least 1 km of travel in that direction stays on the grid.
/// Sorted by (road index, direction) for deterministic output.
std::vector<std::pair<std::string, Direction>> valid_next_roads(const GridWorld& world,
                                                                Coordinate position);

/// Membership test equivalent to valid_next_roads without materializing it.
bool is_valid_next_road(const GridWorld& world, Coordinate position, std::string_view road,
                        Direction direction);

/// Fold move_along_road over steps, recording start, every lattice point
/// crossed, and the final position.
Simulation simulate_steps(const GridWorld& world, Coordinate start,
                          const std::vector<PathStep>& steps);

/// Weighted intersection graph over the lattice. Edge cost is
/// segment length / road weight, so shortest paths minimize travel time.
class RoadGraph {
public:
    explicit RoadGraph(const GridWorld& world);

    const GridWorld& world() const { return *world_; }
    int side() const { return side_; }  // grid_size + 1
    int64_t node_count() const { return static_cast<int64_t>(side_) * side_; }
    int64_t edge_count() const {
        return static_cast<int64_t>(2) * (side_ - 1) * side_;
    }

    // Node ids follow lexicographic (x, y) order; ties in the Dijkstra
    // frontier therefore break toward the smaller (x, y).
    int node_id(int x, int y) const { return x * side_ + y; }
    Coordinate node_position(int id) const {
        return Coordinate{static_cast<double>(id / side_), static_cast<double>(id % side_)};
    }

    double horizontal_cost(int y) const { return h_cost_[static_cast<size_t>(y)]; }
    double vertical_cost(int x) const { return v_cost_[static_cast<size_t>(x)]; }

    struct Tree {
        int source = -1;
        std::vector<double> dist;
        std::vector<int32_t> parent;  // -1 at the source / unreachable
    };

    /// Full single-source Dijkstra; deterministic under cost ties
    /// (lexicographic node order, parent updates on strict improvement only).
    Tree dijkstra(int source_node) const;

    /// Shortest (fastest) trajectory between two POIs. Throws
    /// identical-endpoints and unknown-poi.
    Trajectory shortest_path(std::string_view start_poi, std::string_view end_poi) const;

    /// Extract one trajectory from a precomputed tree (for all-pairs batches).
    Trajectory extract(const Tree& tree, std::string_view start_poi,
                       std::string_view end_poi) const;

private:
    const GridWorld* world_;
    int side_;
    std::vector<double> h_cost_;  // east-west unit cost per horizontal road offset
    std::vector<double> v_cost_;  // north-south unit cost per vertical road offset
};

}  // namespace gridcity
