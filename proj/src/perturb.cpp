#include "gridcity/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "gridcity/rng.hpp"

namespace gridcity::perturb {

namespace {

/// Room (km) from `from` to the grid boundary in `dir`.
double boundary_room(const GridWorld& world, Coordinate from, Direction dir) {
    double g = static_cast<double>(world.grid_size());
    switch (dir) {
        case Direction::north: return g - from.y;
        case Direction::south: return from.y;
        case Direction::east: return g - from.x;
        case Direction::west: return from.x;
    }
    return 0.0;
}

}  // namespace

std::string_view kind_name(Kind k) {
    switch (k) {
        case Kind::road: return "road";
        case Kind::distance: return "distance";
        case Kind::direction: return "direction";
    }
    return "road";
}

Kind kind_from_name(std::string_view name) {
    if (name == "road") return Kind::road;
    if (name == "distance") return Kind::distance;
    if (name == "direction") return Kind::direction;
    fail("configuration-invalid", "unknown perturbation kind '" + std::string(name) + "'");
}

int critical_step(const GridWorld& world, const Trajectory& trajectory) {
    if (trajectory.steps.empty())
        fail("empty-trajectory", "critical step undefined for an empty trajectory");
    int best = 0;
    double best_weight = world.road(trajectory.steps[0].road).weight;
    for (size_t i = 1; i < trajectory.steps.size(); ++i) {
        double w = world.road(trajectory.steps[i].road).weight;
        if (w > best_weight) {
            best_weight = w;
            best = static_cast<int>(i);
        }
    }
    return best;
}

PathStep flip_direction(const PathStep& step) {
    PathStep flipped = step;
    flipped.direction = opposite(step.direction);
    return flipped;
}

PerturbedCase apply_perturbation(const GridWorld& world, const Trajectory& trajectory,
                                 Kind kind, uint64_t seed) {
    const int k = critical_step(world, trajectory);
    const PathStep& original = trajectory.steps[static_cast<size_t>(k)];

    std::vector<PathStep> before(trajectory.steps.begin(), trajectory.steps.begin() + k);
    Coordinate start = world.poi(trajectory.start).position;
    Coordinate destination = world.poi(trajectory.end).position;
    Coordinate p_perturb = simulate_steps(world, start, before).end;

    PathStep replacement = original;
    RngStream rng(seed, std::string("perturb-") + std::string(kind_name(kind)));

    switch (kind) {
        case Kind::road: {
            // Roads actually passing through p_perturb, excluding the
            // original, with directions that are legal there and leave room
            // for the full step length.
            std::vector<std::pair<std::string, Direction>> candidates;
            for (const auto& [road_id, dir] : valid_next_roads(world, p_perturb)) {
                if (road_id == original.road) continue;
                if (boundary_room(world, p_perturb, dir) + 1e-9 < original.length) continue;
                candidates.emplace_back(road_id, dir);
            }
            if (candidates.empty())
                fail("no-alternative-road",
                     "no alternative road through the perturbation point fits the step");
            const auto& [road_id, dir] =
                candidates[static_cast<size_t>(rng.next_below(candidates.size()))];
            replacement.road = road_id;
            replacement.direction = dir;
            break;
        }
        case Kind::distance: {
            double remaining = euclidean(p_perturb, destination);
            int64_t cap = static_cast<int64_t>(std::floor(remaining));
            // Stay on the grid: a longer step must not run past the boundary.
            int64_t room = static_cast<int64_t>(
                std::floor(boundary_room(world, p_perturb, original.direction) + 1e-9));
            cap = std::min(cap, room);
            if (cap < 1)
                fail("zero-remaining-distance", "no room to resample the step length");
            std::vector<int64_t> lengths;
            for (int64_t len = 1; len <= cap; ++len)
                if (static_cast<double>(len) != original.length) lengths.push_back(len);
            if (lengths.empty())
                fail("zero-remaining-distance", "only the original length fits");
            replacement.length = static_cast<double>(
                lengths[static_cast<size_t>(rng.next_below(lengths.size()))]);
            break;
        }
        case Kind::direction: {
            replacement = flip_direction(original);
            if (boundary_room(world, p_perturb, replacement.direction) + 1e-9 <
                replacement.length)
                fail("would-clamp", "inverted step would leave the grid");
            break;
        }
    }

    PerturbedCase result;
    result.spec.kind = kind;
    result.spec.step_index = k;
    result.spec.original = original;
    result.spec.replacement = replacement;
    result.spec.p_perturb = p_perturb;
    result.spec.p_target = move_along_road(world, p_perturb, replacement).position;
    result.prefix = std::move(before);
    result.prefix.push_back(replacement);
    return result;
}

int64_t TurnFrequencyGrid::total() const {
    int64_t sum = 0;
    for (int64_t c : counts) sum += c;
    return sum;
}

int64_t TurnFrequencyGrid::max() const {
    int64_t best = 0;
    for (int64_t c : counts) best = std::max(best, c);
    return best;
}

TurnFrequencyGrid turning_frequencies(const GridWorld& world,
                                      const std::vector<Trajectory>& trajectories) {
    TurnFrequencyGrid grid;
    grid.side = world.grid_size() + 1;
    grid.counts.assign(static_cast<size_t>(grid.side) * grid.side, 0);
    for (const Trajectory& t : trajectories) {
        Coordinate position = world.poi(t.start).position;
        for (size_t i = 0; i + 1 < t.steps.size(); ++i) {
            position = move_along_road(world, position, t.steps[i]).position;
            if (t.steps[i].direction != t.steps[i + 1].direction) {
                int x = static_cast<int>(std::lround(position.x));
                int y = static_cast<int>(std::lround(position.y));
                if (x >= 0 && x < grid.side && y >= 0 && y < grid.side) ++grid.at(x, y);
            }
        }
    }
    return grid;
}

std::vector<PerturbSpec> select_cases_by_threshold(const std::vector<PerturbSpec>& specs,
                                                   const TurnFrequencyGrid& grid, int64_t tau) {
    auto count_at = [&](Coordinate c) -> int64_t {
        int x = static_cast<int>(std::lround(c.x));
        int y = static_cast<int>(std::lround(c.y));
        if (x < 0 || x >= grid.side || y < 0 || y >= grid.side)
            fail("internal", "perturbation point outside the frequency grid");
        return grid.at(x, y);
    };
    std::vector<PerturbSpec> kept;
    for (const PerturbSpec& spec : specs)
        if (count_at(spec.p_perturb) > tau && count_at(spec.p_target) > tau)
            kept.push_back(spec);
    return kept;
}

std::string grid_to_csv(const TurnFrequencyGrid& grid) {
    std::string out;
    out.reserve(static_cast<size_t>(grid.side) * grid.side * 3);
    for (int y = 0; y < grid.side; ++y) {
        for (int x = 0; x < grid.side; ++x) {
            if (x > 0) out += ',';
            out += std::to_string(grid.at(x, y));
        }
        out += '\n';
    }
    return out;
}

std::string grid_to_pgm(const TurnFrequencyGrid& grid) {
    int64_t peak = grid.max();
    std::string out = "P5\n" + std::to_string(grid.side) + " " + std::to_string(grid.side) +
                      "\n255\n";
    out.reserve(out.size() + static_cast<size_t>(grid.side) * grid.side);
    for (int y = grid.side - 1; y >= 0; --y)
        for (int x = 0; x < grid.side; ++x) {
            int64_t c = grid.at(x, y);
            int v = peak == 0 ? 0 : static_cast<int>((c * 255) / peak);
            out += static_cast<char>(v);
        }
    return out;
}

}  // namespace gridcity::perturb
