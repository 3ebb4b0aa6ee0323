#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gridcity/routing.hpp"
#include "gridcity/world.hpp"

namespace gridcity::datagen {

// ---------------------------------------------------------------------------
// Templates

enum class RelationalForm : uint8_t {
    statement1, statement2, statement3, qa_dist, qa_azi, qa_both
};
enum class TrajectoryForm : uint8_t { narrative1, narrative2, qa1, qa2 };

std::string_view form_name(RelationalForm f);
std::string_view form_name(TrajectoryForm f);
RelationalForm relational_form_from_name(std::string_view name);
TrajectoryForm trajectory_form_from_name(std::string_view name);

struct RelationalSample {
    std::string a, b;       // ordered pair of poi ids
    int64_t distance_m = 0; // round-half-up of 1000 * distance_km
    double azimuth_deg = 0; // rounded to 2 decimals
    RelationalForm form = RelationalForm::statement1;
    std::string text;
};

struct TrajectorySample {
    Trajectory trajectory;
    TrajectoryForm form = TrajectoryForm::narrative1;
    std::string text;
};

/// Render one relational sample; text matches the selected surface form
/// exactly. Throws coincident-pois for POIs at the same position.
RelationalSample render_relational(const GridWorld& world, std::string_view a,
                                   std::string_view b, RelationalForm form);

/// Render one trajectory sample; parse_path(text) recovers trajectory.steps
/// exactly. Only start/end ids and steps of `t` are consulted.
/// Throws empty-trajectory.
TrajectorySample render_trajectory(const GridWorld& world, const Trajectory& t,
                                   TrajectoryForm form);

/// "Start at p_i, then go ..." truncated after clause k (1-based); k = 0
/// yields just the start phrase.
std::string render_step_prefix(const Trajectory& t, size_t k);

// ---------------------------------------------------------------------------
// Split & exposure protocols

using PoiPair = std::pair<std::string, std::string>;

struct PairSplit {
    std::vector<PoiPair> train, test;  // unordered pairs, canonical order within
};

/// Shuffle all unordered pairs deterministically and split by ratio
/// (floor rule for the train side). Reciprocal orderings stay together by
/// construction: downstream emission expands each unordered pair to both
/// orders inside its own side. Throws invalid-ratio.
PairSplit split_pairs(const std::vector<std::string>& pois, int train_pct, int test_pct,
                      uint64_t seed);

enum class Regime : uint8_t { bridged, no_exposure };
std::string_view regime_name(Regime r);
Regime regime_from_name(std::string_view name);

struct ExposurePartition {
    Regime regime = Regime::bridged;
    std::vector<std::string> heldout;  // P_heldout
    std::vector<std::string> main;     // P_main
    std::vector<PoiPair> train_pairs;  // regime-dependent policy
    std::vector<PoiPair> test_pairs;   // held-back share of main-main pairs
    std::vector<PoiPair> eval_pairs;   // heldout-heldout pairs
};

/// Hold out n_heldout POIs and materialize the pair policy:
///   bridged:     train = main-main train share + all main-heldout pairs
///   no-exposure: train = main-main train share only
/// eval is always the heldout-heldout pairs. Throws invalid-count.
ExposurePartition exposure_partition(const std::vector<std::string>& pois, Regime regime,
                                     int n_heldout, std::pair<int, int> ratio, uint64_t seed);

// ---------------------------------------------------------------------------
// Region membership QA

struct CircleRegion {
    std::string center;
    double radius_km = 0;
};
struct TriangleRegion {
    std::string a, b, c;
};

struct RegionQASample {
    std::variant<CircleRegion, TriangleRegion> region;
    std::string query;
    bool label = false;      // boundary-inclusive membership
    std::string split;       // "train" / "test" / "eval" (reserved-quarter query)
    std::string text;
};

bool point_in_circle(Coordinate p, Coordinate center, double radius);  // inclusive
bool point_in_triangle(Coordinate p, Coordinate a, Coordinate b, Coordinate c);  // inclusive

/// A quarter of the POIs is reserved: reserved POIs appear only as queries
/// of eval samples and never inside region definitions. Circle radii are
/// sampled uniformly from [radius_min, radius_max] and rounded to one
/// decimal; labels are exact for the rendered radius. Throws
/// insufficient-pois for worlds with fewer than 4 POIs.
std::vector<RegionQASample> gen_region_qa(const GridWorld& world, int n_samples, uint64_t seed,
                                          double radius_min = 2.0, double radius_max = 30.0);

// ---------------------------------------------------------------------------
// Step-wise probe supervision

struct StepProbeTarget {
    std::string traj_id;      // "<start>|<end>"
    int step = 0;             // 1-based prefix length
    std::string prefix_text;  // trajectory text truncated after this step
    Coordinate position;      // ground-truth location after the step
};

struct StepProbeSets {
    std::vector<StepProbeTarget> train, eval;
};

/// Sample n_train trajectories whose endpoints avoid the heldout set and
/// n_eval whose endpoints are both heldout, then emit one target per step.
/// Positions come from simulation and are checked against each trajectory's
/// endpoint. Throws pool-exhausted when the pool cannot cover the counts.
StepProbeSets gen_step_probe_targets(const GridWorld& world,
                                     const std::vector<Trajectory>& pool, int n_train,
                                     int n_eval, const std::vector<std::string>& heldout,
                                     uint64_t seed);

// ---------------------------------------------------------------------------
// Corpus planning (deterministic order: sorted by (pair, form), then
// shuffled by seed, so output never depends on worker count)

struct TemplatePolicy {
    std::vector<RelationalForm> relational_train{RelationalForm::statement1,
                                                 RelationalForm::statement2,
                                                 RelationalForm::statement3};
    std::vector<RelationalForm> relational_eval{RelationalForm::qa_dist, RelationalForm::qa_azi,
                                                RelationalForm::qa_both};
    std::vector<TrajectoryForm> trajectory_train{TrajectoryForm::narrative1,
                                                 TrajectoryForm::narrative2};
    std::vector<TrajectoryForm> trajectory_eval{TrajectoryForm::qa1, TrajectoryForm::qa2};
    bool sample_one = true;  // one uniformly chosen form per ordered pair; else all forms
};

struct RelationalEntry {
    uint32_t a = 0, b = 0;  // indexes into world.pois()
    RelationalForm form = RelationalForm::statement1;
};

struct RelationalCorpusPlan {
    std::vector<RelationalEntry> train, test;
};

RelationalCorpusPlan plan_relational_corpus(const GridWorld& world, int train_pct, int test_pct,
                                            const TemplatePolicy& policy, uint64_t seed);

struct PackedStep {
    uint16_t road = 0;  // index into world.roads()
    uint8_t dir = 0;
    uint16_t len = 0;   // km
};

struct TrajectoryEntry {
    uint32_t a = 0, b = 0;  // start / end poi indexes
    TrajectoryForm form = TrajectoryForm::narrative1;
    double cost = 0.0;
    std::vector<PackedStep> steps;
};

struct TrajectoryCorpusPlan {
    std::vector<TrajectoryEntry> train, test, eval;
};

TrajectoryCorpusPlan plan_trajectory_corpus(const GridWorld& world, const RoadGraph& graph,
                                            const ExposurePartition& partition,
                                            const TemplatePolicy& policy, uint64_t seed,
                                            int jobs);

/// Rebuild the full Trajectory (steps, node trace, cost) for a plan entry.
Trajectory entry_to_trajectory(const GridWorld& world, const TrajectoryEntry& entry);

}  // namespace gridcity::datagen
