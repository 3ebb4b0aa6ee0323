#include "gridcity/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace gridcity {

namespace {

constexpr double kOnRoadEps = 1e-9;

bool nearly_integer(double v, int* out) {
    double r = std::round(v);
    if (std::abs(v - r) <= kOnRoadEps) {
        *out = static_cast<int>(r);
        return true;
    }
    return false;
}

}  // namespace

Direction opposite(Direction d) {
    switch (d) {
        case Direction::north: return Direction::south;
        case Direction::south: return Direction::north;
        case Direction::east: return Direction::west;
        case Direction::west: return Direction::east;
    }
    return Direction::north;
}

std::string_view direction_name(Direction d) {
    switch (d) {
        case Direction::north: return "north";
        case Direction::east: return "east";
        case Direction::south: return "south";
        case Direction::west: return "west";
    }
    return "north";
}

std::optional<Direction> direction_from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "north") return Direction::north;
    if (lower == "east") return Direction::east;
    if (lower == "south") return Direction::south;
    if (lower == "west") return Direction::west;
    return std::nullopt;
}

bool direction_is_vertical(Direction d) {
    return d == Direction::north || d == Direction::south;
}

MoveResult move_along_road(const GridWorld& world, Coordinate origin, const PathStep& step) {
    const double g = static_cast<double>(world.grid_size());
    double dx = 0.0, dy = 0.0;
    switch (step.direction) {
        case Direction::north: dy = step.length; break;
        case Direction::south: dy = -step.length; break;
        case Direction::east: dx = step.length; break;
        case Direction::west: dx = -step.length; break;
    }
    Coordinate raw{origin.x + dx, origin.y + dy};
    MoveResult result;
    result.position = Coordinate{std::clamp(raw.x, 0.0, g), std::clamp(raw.y, 0.0, g)};
    result.clamped = raw.x != result.position.x || raw.y != result.position.y;
    return result;
}

std::optional<Coordinate> find_intersection(const GridWorld& world, std::string_view road_a,
                                            std::string_view road_b) {
    const Road& a = world.road(road_a);
    const Road& b = world.road(road_b);
    if (a.orientation == b.orientation) return std::nullopt;
    const Road& horizontal = a.orientation == Orientation::horizontal ? a : b;
    const Road& vertical = a.orientation == Orientation::vertical ? a : b;
    return Coordinate{static_cast<double>(vertical.offset),
                      static_cast<double>(horizontal.offset)};
}

std::vector<std::pair<std::string, Direction>> valid_next_roads(const GridWorld& world,
                                                                Coordinate position) {
    std::vector<std::pair<std::string, Direction>> result;
    const double g = static_cast<double>(world.grid_size());
    int offset = 0;
    if (nearly_integer(position.y, &offset) && offset >= 0 && offset <= world.grid_size()) {
        const Road& road = world.horizontal_road(offset);
        if (position.x + 1.0 <= g + kOnRoadEps) result.emplace_back(road.id, Direction::east);
        if (position.x - 1.0 >= -kOnRoadEps) result.emplace_back(road.id, Direction::west);
    }
    if (nearly_integer(position.x, &offset) && offset >= 0 && offset <= world.grid_size()) {
        const Road& road = world.vertical_road(offset);
        if (position.y + 1.0 <= g + kOnRoadEps) result.emplace_back(road.id, Direction::north);
        if (position.y - 1.0 >= -kOnRoadEps) result.emplace_back(road.id, Direction::south);
    }
    std::sort(result.begin(), result.end(), [&](const auto& lhs, const auto& rhs) {
        if (lhs.first != rhs.first) return lhs.first < rhs.first;
        return static_cast<int>(lhs.second) < static_cast<int>(rhs.second);
    });
    return result;
}

bool is_valid_next_road(const GridWorld& world, Coordinate position, std::string_view road_id,
                        Direction direction) {
    const Road* road = world.find_road(road_id);
    if (!road) return false;
    const double g = static_cast<double>(world.grid_size());
    if (road->orientation == Orientation::horizontal) {
        if (direction_is_vertical(direction)) return false;
        int y = 0;
        if (!nearly_integer(position.y, &y) || y != road->offset) return false;
        if (direction == Direction::east) return position.x + 1.0 <= g + kOnRoadEps;
        return position.x - 1.0 >= -kOnRoadEps;
    }
    if (!direction_is_vertical(direction)) return false;
    int x = 0;
    if (!nearly_integer(position.x, &x) || x != road->offset) return false;
    if (direction == Direction::north) return position.y + 1.0 <= g + kOnRoadEps;
    return position.y - 1.0 >= -kOnRoadEps;
}

Simulation simulate_steps(const GridWorld& world, Coordinate start,
                          const std::vector<PathStep>& steps) {
    Simulation sim;
    sim.trace.push_back(start);
    Coordinate current = start;
    for (const PathStep& step : steps) {
        MoveResult moved = move_along_road(world, current, step);
        sim.clamped = sim.clamped || moved.clamped;

        // Lattice points crossed: integer values of the moving coordinate
        // strictly beyond the origin up to (and including) the destination,
        // provided the fixed coordinate is itself on the lattice.
        bool vertical = direction_is_vertical(step.direction);
        double fixed = vertical ? current.x : current.y;
        int fixed_int = 0;
        if (nearly_integer(fixed, &fixed_int)) {
            double from = vertical ? current.y : current.x;
            double to = vertical ? moved.position.y : moved.position.x;
            if (to > from) {
                for (int k = static_cast<int>(std::floor(from + kOnRoadEps)) + 1;
                     k <= static_cast<int>(std::floor(to + kOnRoadEps)); ++k) {
                    sim.trace.push_back(vertical
                                            ? Coordinate{static_cast<double>(fixed_int),
                                                         static_cast<double>(k)}
                                            : Coordinate{static_cast<double>(k),
                                                         static_cast<double>(fixed_int)});
                }
            } else if (to < from) {
                for (int k = static_cast<int>(std::ceil(from - kOnRoadEps)) - 1;
                     k >= static_cast<int>(std::ceil(to - kOnRoadEps)); --k) {
                    sim.trace.push_back(vertical
                                            ? Coordinate{static_cast<double>(fixed_int),
                                                         static_cast<double>(k)}
                                            : Coordinate{static_cast<double>(k),
                                                         static_cast<double>(fixed_int)});
                }
            }
        }
        current = moved.position;
    }
    sim.end = current;
    if (sim.trace.empty() || !(sim.trace.back() == sim.end)) sim.trace.push_back(sim.end);
    return sim;
}

RoadGraph::RoadGraph(const GridWorld& world)
    : world_(&world), side_(world.grid_size() + 1) {
    h_cost_.resize(static_cast<size_t>(side_));
    v_cost_.resize(static_cast<size_t>(side_));
    for (int j = 0; j < side_; ++j) h_cost_[static_cast<size_t>(j)] = 1.0 / world.horizontal_road(j).weight;
    for (int i = 0; i < side_; ++i) v_cost_[static_cast<size_t>(i)] = 1.0 / world.vertical_road(i).weight;
}

RoadGraph::Tree RoadGraph::dijkstra(int source_node) const {
    const int n = side_ * side_;
    Tree tree;
    tree.source = source_node;
    tree.dist.assign(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    tree.parent.assign(static_cast<size_t>(n), -1);
    tree.dist[static_cast<size_t>(source_node)] = 0.0;

    using Entry = std::pair<double, int>;  // (dist, node); node order breaks ties
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    queue.emplace(0.0, source_node);

    while (!queue.empty()) {
        auto [d, u] = queue.top();
        queue.pop();
        if (d != tree.dist[static_cast<size_t>(u)]) continue;
        int x = u / side_, y = u % side_;

        auto relax = [&](int v, double cost) {
            double nd = d + cost;
            if (nd < tree.dist[static_cast<size_t>(v)]) {
                tree.dist[static_cast<size_t>(v)] = nd;
                tree.parent[static_cast<size_t>(v)] = u;
                queue.emplace(nd, v);
            }
        };
        if (y + 1 < side_) relax(u + 1, v_cost_[static_cast<size_t>(x)]);          // north
        if (x + 1 < side_) relax(u + side_, h_cost_[static_cast<size_t>(y)]);      // east
        if (y > 0) relax(u - 1, v_cost_[static_cast<size_t>(x)]);                  // south
        if (x > 0) relax(u - side_, h_cost_[static_cast<size_t>(y)]);              // west
    }
    return tree;
}

Trajectory RoadGraph::extract(const Tree& tree, std::string_view start_poi,
                              std::string_view end_poi) const {
    const Poi& a = world_->poi(start_poi);
    const Poi& b = world_->poi(end_poi);
    int start_node = node_id(static_cast<int>(a.position.x), static_cast<int>(a.position.y));
    int end_node = node_id(static_cast<int>(b.position.x), static_cast<int>(b.position.y));
    if (start_node != tree.source)
        fail("internal", "tree source does not match start POI");
    if (start_node == end_node)
        fail("identical-endpoints", "shortest path requires distinct POIs");

    std::vector<int> nodes;
    for (int v = end_node; v != -1; v = tree.parent[static_cast<size_t>(v)]) nodes.push_back(v);
    std::reverse(nodes.begin(), nodes.end());

    Trajectory t;
    t.start = a.id;
    t.end = b.id;
    t.cost = tree.dist[static_cast<size_t>(end_node)];
    t.nodes.reserve(nodes.size());
    for (int v : nodes) t.nodes.push_back(node_position(v));

    for (size_t i = 1; i < nodes.size(); ++i) {
        int prev = nodes[i - 1], cur = nodes[i];
        Direction dir;
        const Road* road;
        if (cur == prev + 1) {
            dir = Direction::north;
            road = &world_->vertical_road(prev / side_);
        } else if (cur == prev - 1) {
            dir = Direction::south;
            road = &world_->vertical_road(prev / side_);
        } else if (cur == prev + side_) {
            dir = Direction::east;
            road = &world_->horizontal_road(prev % side_);
        } else {
            dir = Direction::west;
            road = &world_->horizontal_road(prev % side_);
        }
        if (!t.steps.empty() && t.steps.back().direction == dir &&
            t.steps.back().road == road->id) {
            t.steps.back().length += 1.0;
        } else {
            t.steps.push_back(PathStep{road->id, dir, 1.0});
        }
    }
    return t;
}

Trajectory RoadGraph::shortest_path(std::string_view start_poi, std::string_view end_poi) const {
    const Poi& a = world_->poi(start_poi);
    const Poi& b = world_->poi(end_poi);
    if (a.position == b.position)
        fail("identical-endpoints", "shortest path requires distinct POIs");
    Tree tree = dijkstra(node_id(static_cast<int>(a.position.x), static_cast<int>(a.position.y)));
    return extract(tree, start_poi, end_poi);
}

}  // namespace gridcity
