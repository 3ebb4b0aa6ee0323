#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridcity/routing.hpp"
#include "gridcity/world.hpp"

namespace gridcity::perturb {

enum class Kind : uint8_t { road, distance, direction };
std::string_view kind_name(Kind k);
Kind kind_from_name(std::string_view name);

struct PerturbSpec {
    Kind kind = Kind::road;
    int step_index = 0;      // s_critical
    PathStep original;
    PathStep replacement;    // differs in exactly the perturbed facet
    Coordinate p_perturb;    // position where the deviation starts
    Coordinate p_target;     // position immediately after the perturbed step
};

struct PerturbedCase {
    PerturbSpec spec;
    std::vector<PathStep> prefix;  // steps before s_critical + replacement
};

/// Index of the step whose road has the highest speed weight; earliest
/// index wins ties. Throws empty-trajectory.
int critical_step(const GridWorld& world, const Trajectory& trajectory);

PathStep flip_direction(const PathStep& step);

/// Apply one §-style perturbation at the critical step:
///   road:      a different road through p_perturb, direction legal on it
///   distance:  integer length in [1, floor(remaining straight-line distance
///              to the destination)], excluding the original
///   direction: heading inverted (involution)
/// Replacements are constrained to stay on the grid so the perturbed prefix
/// always simulates without clamping. Throws no-alternative-road /
/// zero-remaining-distance / would-clamp.
PerturbedCase apply_perturbation(const GridWorld& world, const Trajectory& trajectory,
                                 Kind kind, uint64_t seed);

struct TurnFrequencyGrid {
    int side = 0;  // grid_size + 1
    std::vector<int64_t> counts;  // indexed [y * side + x]

    int64_t& at(int x, int y) { return counts[static_cast<size_t>(y) * side + x]; }
    int64_t at(int x, int y) const { return counts[static_cast<size_t>(y) * side + x]; }
    int64_t total() const;
    int64_t max() const;
};

/// Count, per lattice intersection, the boundaries between consecutive
/// steps whose directions differ.
TurnFrequencyGrid turning_frequencies(const GridWorld& world,
                                      const std::vector<Trajectory>& trajectories);

/// Keep specs whose counts at both p_perturb and p_target strictly exceed tau.
std::vector<PerturbSpec> select_cases_by_threshold(const std::vector<PerturbSpec>& specs,
                                                   const TurnFrequencyGrid& grid, int64_t tau);

/// CSV matrix, rows y = 0..grid_size top to bottom, comma-separated counts.
std::string grid_to_csv(const TurnFrequencyGrid& grid);

/// Binary PGM (P5) heatmap, north (y = grid_size) on the top row, counts
/// scaled linearly to 0..255.
std::string grid_to_pgm(const TurnFrequencyGrid& grid);

}  // namespace gridcity::perturb
