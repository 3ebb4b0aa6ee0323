#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>

#include "gridcity/datagen.hpp"
#include "gridcity/metrics.hpp"
#include "gridcity/rng.hpp"
#include "helpers.hpp"

using namespace gridcity;
using namespace gridcity::metrics;

namespace {

/// Exhaustive oracle: minimum over all monotone couplings of the maximum
/// pairwise distance (branch-and-bound keeps it exact).
double brute_frechet(const std::vector<Coordinate>& a, const std::vector<Coordinate>& b) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(size_t, size_t, double)> walk = [&](size_t i, size_t j, double cur) {
        cur = std::max(cur, euclidean(a[i], b[j]));
        if (cur >= best) return;
        if (i + 1 == a.size() && j + 1 == b.size()) {
            best = cur;
            return;
        }
        if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, cur);
        if (i + 1 < a.size()) walk(i + 1, j, cur);
        if (j + 1 < b.size()) walk(i, j + 1, cur);
    };
    walk(0, 0, 0.0);
    return best;
}

std::vector<Coordinate> random_trace(RngStream& rng, size_t max_len) {
    size_t len = 1 + static_cast<size_t>(rng.next_below(max_len));
    std::vector<Coordinate> trace;
    for (size_t i = 0; i < len; ++i)
        trace.push_back(Coordinate{rng.next_in(0, 20), rng.next_in(0, 20)});
    return trace;
}

}  // namespace

TEST_CASE("sed identities and fallbacks") {
    GridWorld world = testutil::make_world(10, {{0, 0}, {3, 2}});
    RoadGraph graph(world);
    Trajectory truth = graph.shortest_path("p_1", "p_2");
    auto sample = datagen::render_trajectory(world, truth, datagen::TrajectoryForm::narrative1);

    auto r = sed(world, Coordinate{0, 0}, Coordinate{3, 2}, sample.text);
    CHECK(r.spd == 0.0);
    CHECK(r.epd == 0.0);

    // Fewer than 2 steps: predicted start falls back to the ground truth.
    auto single = sed(world, Coordinate{5, 5}, Coordinate{5, 9},
                      "go north on r_17 for 2km");
    CHECK(single.spd == 0.0);
    CHECK(single.epd == doctest::Approx(2.0));
    CHECK(single.start_fallback);

    // Parallel first two roads: indeterminate intersection, same fallback.
    auto parallel = sed(world, Coordinate{5, 5}, Coordinate{5, 5},
                        "go east on r_2 for 1km, then go west on r_3 for 1km");
    CHECK(parallel.start_fallback);
    CHECK(parallel.spd == 0.0);
}

TEST_CASE("vrp identities, emptiness, and a hand-built 0.75 case") {
    GridWorld world = testutil::make_world(10, {{0, 0}, {3, 2}});
    RoadGraph graph(world);
    Trajectory truth = graph.shortest_path("p_1", "p_2");
    auto sample = datagen::render_trajectory(world, truth, datagen::TrajectoryForm::qa1);
    CHECK(vrp(world, Coordinate{0, 0}, sample.text) == 1.0);

    CHECK(vrp(world, Coordinate{0, 0}, "complete gibberish") == 0.0);
    CHECK(vrp(world, Coordinate{0, 0}, "") == 0.0);

    // Four steps, exactly one (unknown road) illegal; verified against a
    // stepwise oracle below.
    std::string text =
        "go north on r_12 for 2km, then go east on r_3 for 3km, then go north on r_99 for "
        "1km, then go west on r_4 for 1km";
    CHECK(vrp(world, Coordinate{0, 0}, text) == doctest::Approx(0.75));

    auto parsed = pathparse::parse_path(text);
    REQUIRE(parsed.steps.size() == 4);
    Coordinate pos{0, 0};
    int legal = 0;
    for (const auto& step : parsed.steps) {
        auto options = valid_next_roads(world, pos);
        for (const auto& [road, dir] : options)
            if (road == step.road && dir == step.direction) {
                ++legal;
                break;
            }
        pos = move_along_road(world, pos, step).position;
    }
    CHECK(legal == 3);
}

TEST_CASE("spa gates on completeness and canonical merging") {
    GridWorld world = testutil::make_world(10, {{0, 0}, {0, 5}});
    Trajectory truth;
    truth.start = "p_1";
    truth.end = "p_2";
    truth.steps = {{"r_12", Direction::north, 5.0}};

    auto exact = pathparse::parse_path("Start at p_1, then go north on r_12 for 5km, and you "
                                       "will arrive at p_2.");
    CHECK(spa(exact, truth));

    // Same geometry, split into two steps: not an exact match.
    auto split = pathparse::parse_path(
        "go north on r_12 for 2km, then go north on r_12 for 3km");
    CHECK_FALSE(spa(split, truth));

    auto incomplete = pathparse::parse_path("go north on r_12 for 5km, then quack");
    CHECK_FALSE(spa(incomplete, truth));
}

TEST_CASE("endpoint vector ratios and cosines") {
    auto identity = endpoint_vectors({0, 0}, {3, 4}, {0, 0}, {3, 4});
    CHECK(identity.vmr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(identity.vcs == doctest::Approx(1.0).epsilon(1e-12));

    auto reversed = endpoint_vectors({0, 0}, {3, 4}, {3, 4}, {0, 0});
    CHECK(reversed.vmr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(reversed.vcs == doctest::Approx(-1.0).epsilon(1e-12));

    auto orthogonal = endpoint_vectors({0, 0}, {1, 0}, {0, 0}, {0, 1});
    CHECK(orthogonal.vmr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(orthogonal.vcs == doctest::Approx(0.0).epsilon(1e-12));

    auto degenerate_pred = endpoint_vectors({0, 0}, {1, 0}, {2, 2}, {2, 2});
    CHECK(degenerate_pred.vmr == 0.0);
    CHECK(degenerate_pred.vcs == 0.0);
    CHECK_FALSE(degenerate_pred.vcs_defined);

    CHECK_THROWS_WITH_AS(endpoint_vectors({1, 1}, {1, 1}, {0, 0}, {1, 0}),
                         doctest::Contains("degenerate-ground-truth"), Error);

    // VCS is invariant under uniform scaling of both displacements.
    RngStream rng(8, "vcs-scaling");
    for (int k = 0; k < 200; ++k) {
        Coordinate ge{rng.next_in(-5, 5), rng.next_in(-5, 5)};
        Coordinate pe{rng.next_in(-5, 5), rng.next_in(-5, 5)};
        if ((ge.x == 0 && ge.y == 0) || (pe.x == 0 && pe.y == 0)) continue;
        double s = rng.next_in(0.1, 10.0);
        auto base = endpoint_vectors({0, 0}, ge, {0, 0}, pe);
        auto scaled = endpoint_vectors({0, 0}, {ge.x * s, ge.y * s}, {0, 0},
                                       {pe.x * s, pe.y * s});
        CHECK(base.vcs == doctest::Approx(scaled.vcs).epsilon(1e-10));
    }
}

TEST_CASE("frechet basics and oracle equivalence") {
    std::vector<Coordinate> line{{0, 0}, {1, 0}, {2, 0}};
    CHECK(frechet(line, line) == 0.0);

    std::vector<Coordinate> p{{0, 0}};
    std::vector<Coordinate> q{{3, 4}};
    CHECK(frechet(p, q) == doctest::Approx(5.0));

    CHECK_THROWS_WITH_AS(frechet({}, line), doctest::Contains("empty-path"), Error);

    RngStream rng(123, "frechet-oracle");
    for (int k = 0; k < 200; ++k) {
        auto a = random_trace(rng, 8);
        auto b = random_trace(rng, 8);
        double dp = frechet(a, b);
        double brute = brute_frechet(a, b);
        CHECK(dp == doctest::Approx(brute).epsilon(1e-12));
        CHECK(frechet(b, a) == doctest::Approx(dp).epsilon(1e-12));
        CHECK(dp >= std::max(euclidean(a.front(), b.front()),
                             euclidean(a.back(), b.back())) -
                        1e-12);
    }
}

TEST_CASE("regression stats identities") {
    std::vector<double> truth{1, 2, 3, 4, 5};

    auto perfect = regression_stats(truth, truth, false);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.r2 == 1.0);
    CHECK(perfect.mrpe_percent == 0.0);
    CHECK(perfect.spearman == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(perfect.pearson == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> constant(5, 3.0);  // mean of truth
    auto flat = regression_stats(constant, truth, false);
    CHECK(flat.r2 == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<double> reversed{5, 4, 3, 2, 1};
    auto rev = regression_stats(reversed, truth, false);
    CHECK(rev.spearman == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(regression_stats(std::vector<double>{1.0}, truth, false),
                         doctest::Contains("length-mismatch"), Error);
    CHECK_THROWS_WITH_AS(regression_stats(constant, constant, false),
                         doctest::Contains("degenerate-truth"), Error);
}

TEST_CASE("angular regression wraps differences") {
    std::vector<double> pred{179.0, -90.0, 10.0};
    std::vector<double> truth{-179.0, 90.0, 10.0};
    auto stats = regression_stats(pred, truth, true);
    CHECK(stats.mae == doctest::Approx((2.0 + 180.0 + 0.0) / 3.0));
    CHECK(stats.mrpe_percent ==
          doctest::Approx(100.0 * (2.0 / 180 + 180.0 / 180 + 0.0) / 3.0));
}

TEST_CASE("regression invariances") {
    RngStream rng(55, "regression-props");
    std::vector<double> pred, truth;
    for (int i = 0; i < 50; ++i) {
        truth.push_back(rng.next_in(1, 10));
        pred.push_back(truth.back() + rng.next_in(-0.5, 0.5));
    }
    auto base = regression_stats(pred, truth, false);

    // R² invariant under adding the same constant to both series.
    std::vector<double> pred_c = pred, truth_c = truth;
    for (auto& v : pred_c) v += 13.5;
    for (auto& v : truth_c) v += 13.5;
    auto shifted = regression_stats(pred_c, truth_c, false);
    CHECK(shifted.r2 == doctest::Approx(base.r2).epsilon(1e-10));

    // Pearson invariant under positive affine maps of either series.
    std::vector<double> pred_a = pred;
    for (auto& v : pred_a) v = 2.5 * v + 7.0;
    auto affine = regression_stats(pred_a, truth, false);
    CHECK(affine.pearson == doctest::Approx(base.pearson).epsilon(1e-10));
}

TEST_CASE("consistency triples calibration") {
    WorldConfig cfg;
    cfg.grid_size = 50;
    cfg.n_poi = 64;
    cfg.seed = 77;
    GridWorld world = GridWorld::build(cfg);

    std::map<std::string, Coordinate> coords;
    std::map<std::string, std::vector<double>> exact, scaled;
    for (const Poi& p : world.pois()) {
        coords[p.id] = p.position;
        exact[p.id] = {p.position.x, p.position.y};
        scaled[p.id] = {3.0 * p.position.x, 3.0 * p.position.y};
    }

    auto iso = consistency_triples(exact, coords, 2000, 5);
    CHECK(iso.distance.pearson == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(iso.distance.spearman == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(iso.angle.pearson == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(iso.angle.spearman == doctest::Approx(1.0).epsilon(1e-9));

    auto similar = consistency_triples(scaled, coords, 2000, 5);
    CHECK(similar.distance.pearson == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(similar.distance.spearman == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(similar.angle.pearson == doctest::Approx(1.0).epsilon(1e-9));

    // Fixed random permutation of the coordinates: correlations near zero.
    std::vector<std::string> ids;
    for (const auto& [id, c] : coords) ids.push_back(id);
    std::vector<std::string> shuffled = ids;
    RngStream rng(13, "perm");
    rng.shuffle(shuffled);
    std::map<std::string, std::vector<double>> permuted;
    for (size_t i = 0; i < ids.size(); ++i) {
        Coordinate c = coords[shuffled[i]];
        permuted[ids[i]] = {c.x, c.y};
    }
    auto null = consistency_triples(permuted, coords, 10000, 5);
    CHECK(std::abs(null.distance.pearson) < 0.1);
    CHECK(std::abs(null.distance.spearman) < 0.1);
    CHECK(std::abs(null.angle.pearson) < 0.1);
    CHECK(std::abs(null.angle.spearman) < 0.1);

    std::map<std::string, std::vector<double>> two;
    two["p_1"] = {0, 0};
    two["p_2"] = {1, 1};
    CHECK_THROWS_WITH_AS(consistency_triples(two, coords, 10, 1),
                         doctest::Contains("too-few-ids"), Error);
}

TEST_CASE("perturbation outcomes") {
    GridWorld world = testutil::make_world(10, {{0, 0}, {5, 5}});
    RoadGraph graph(world);
    Trajectory truth = graph.shortest_path("p_1", "p_2");
    Coordinate gt_start{0, 0}, gt_end{5, 5};

    // Oracle continuation: the unperturbed truth itself.
    auto sample = datagen::render_trajectory(world, truth, datagen::TrajectoryForm::narrative1);
    auto ideal = perturbation_outcome(world, gt_start, {}, sample.text, gt_end);
    CHECK(ideal.fsa);
    CHECK(ideal.sa == 1.0);
    CHECK(ideal.dd == 0.0);

    auto empty = perturbation_outcome(world, gt_start, {}, "hmm", gt_end);
    CHECK_FALSE(empty.fsa);
    CHECK(empty.sa == 0.0);
    CHECK(empty.dd == doctest::Approx(euclidean(gt_start, gt_end)));

    // Prefix moves the departure point; dd measured from the simulated end.
    std::vector<PathStep> prefix{{world.vertical_road(0).id, Direction::north, 5.0}};
    auto after_prefix = perturbation_outcome(world, gt_start, prefix, "blah", gt_end);
    CHECK(after_prefix.dd == doctest::Approx(5.0));

    auto single = perturbation_outcome(world, gt_start, {},
                                       "go north on " + world.vertical_road(0).id + " for 5km",
                                       gt_end);
    CHECK(single.fsa);
    CHECK(single.sa == 1.0);
    CHECK(single.sa_vacuous);
    CHECK(single.dd == doctest::Approx(5.0));
}

TEST_CASE("score_case on ground truth is the identity row") {
    WorldConfig cfg;
    cfg.grid_size = 12;
    cfg.n_poi = 8;
    cfg.seed = 3;
    GridWorld world = GridWorld::build(cfg);
    RoadGraph graph(world);
    const auto& pois = world.pois();
    MetricReport report;
    for (size_t i = 0; i < pois.size(); ++i)
        for (size_t j = 0; j < pois.size(); ++j) {
            if (i == j) continue;
            Trajectory t = graph.shortest_path(pois[i].id, pois[j].id);
            auto sample = datagen::render_trajectory(world, t, datagen::TrajectoryForm::qa2);
            report.rows.push_back(score_case(world, "case", t, sample.text));
        }
    report.finalize();
    CHECK(report.spd_mean == 0.0);
    CHECK(report.epd_mean == 0.0);
    CHECK(report.vrp_mean == 1.0);
    CHECK(report.spa_rate == 1.0);
    CHECK(report.vmr_mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.vcs_mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.fd_mean == 0.0);
}
