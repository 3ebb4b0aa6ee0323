#include "gridcity/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "gridcity/rng.hpp"

namespace gridcity::metrics {

namespace {

/// Alg. 1 / Alg. 2 shared start estimation: with fewer than 2 steps use the
/// ground-truth start; otherwise backtrack from the intersection of the
/// first two roads along the reverse of step one, falling back to the
/// ground-truth start when the intersection is indeterminate.
Coordinate estimate_start(const GridWorld& world, Coordinate gt_start,
                          const std::vector<PathStep>& steps, bool* fallback) {
    *fallback = true;
    if (steps.size() < 2) return gt_start;
    if (!world.find_road(steps[0].road) || !world.find_road(steps[1].road)) return gt_start;
    auto crossing = find_intersection(world, steps[0].road, steps[1].road);
    if (!crossing) return gt_start;
    *fallback = false;
    PathStep back = steps[0];
    back.direction = opposite(back.direction);
    return move_along_road(world, *crossing, back).position;
}

double mean(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<double> ranks_with_ties(std::span<const double> xs) {
    size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson_of(std::span<const double> a, std::span<const double> b) {
    double ma = mean(a), mb = mean(b);
    double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        fail("degenerate-truth", "correlation undefined for a constant series");
    return sab / std::sqrt(saa * sbb);
}

double spearman_of(std::span<const double> a, std::span<const double> b) {
    auto ra = ranks_with_ties(a);
    auto rb = ranks_with_ties(b);
    return pearson_of(ra, rb);
}

double wrapped_abs_difference(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

}  // namespace

SedResult sed(const GridWorld& world, Coordinate gt_start, Coordinate gt_end,
              const std::string& text) {
    SedResult result;
    result.parsed = pathparse::parse_path(text);
    result.pred_start =
        estimate_start(world, gt_start, result.parsed.steps, &result.start_fallback);
    Simulation sim = simulate_steps(world, result.pred_start, result.parsed.steps);
    result.pred_end = sim.end;
    result.pred_trace = std::move(sim.trace);
    result.spd = euclidean(result.pred_start, gt_start);
    result.epd = euclidean(result.pred_end, gt_end);
    return result;
}

double vrp(const GridWorld& world, Coordinate gt_start, const std::string& text) {
    pathparse::ParsedPath parsed = pathparse::parse_path(text);
    if (parsed.steps.empty()) return 0.0;
    bool fallback = false;
    Coordinate current = estimate_start(world, gt_start, parsed.steps, &fallback);
    int valid = 0;
    for (const PathStep& step : parsed.steps) {
        if (is_valid_next_road(world, current, step.road, step.direction)) ++valid;
        current = move_along_road(world, current, step).position;
    }
    return static_cast<double>(valid) / static_cast<double>(parsed.steps.size());
}

bool spa(const pathparse::ParsedPath& predicted, const Trajectory& truth) {
    return predicted.complete && predicted.steps == truth.steps;
}

EndpointVectors endpoint_vectors(Coordinate gt_start, Coordinate gt_end, Coordinate pred_start,
                                 Coordinate pred_end) {
    double gx = gt_end.x - gt_start.x, gy = gt_end.y - gt_start.y;
    double px = pred_end.x - pred_start.x, py = pred_end.y - pred_start.y;
    double gnorm = std::hypot(gx, gy);
    if (gnorm == 0.0)
        fail("degenerate-ground-truth", "ground-truth displacement is zero");
    double pnorm = std::hypot(px, py);
    EndpointVectors ev;
    ev.vmr = pnorm / gnorm;
    if (pnorm == 0.0) {
        ev.vcs = 0.0;
        ev.vcs_defined = false;
    } else {
        ev.vcs = (gx * px + gy * py) / (gnorm * pnorm);
    }
    return ev;
}

double frechet(std::span<const Coordinate> path_a, std::span<const Coordinate> path_b) {
    if (path_a.empty() || path_b.empty())
        fail("empty-path", "Fréchet distance requires non-empty traces");
    const size_t m = path_a.size(), n = path_b.size();
    std::vector<double> prev(n), cur(n);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            double d = euclidean(path_a[i], path_b[j]);
            double reach;
            if (i == 0 && j == 0) {
                reach = d;
            } else if (i == 0) {
                reach = std::max(cur[j - 1], d);
            } else if (j == 0) {
                reach = std::max(prev[j], d);
            } else {
                reach = std::max(std::min({prev[j - 1], prev[j], cur[j - 1]}), d);
            }
            cur[j] = reach;
        }
        std::swap(prev, cur);
    }
    return prev[n - 1];
}

RegressionStats regression_stats(std::span<const double> pred, std::span<const double> truth,
                                 bool angular) {
    if (pred.size() != truth.size())
        fail("length-mismatch", "prediction and truth series differ in length");
    if (pred.size() < 2)
        fail("length-mismatch", "regression stats require at least 2 points");

    const size_t n = pred.size();
    RegressionStats stats;
    double abs_sum = 0, sq_sum = 0, rel_sum = 0;
    for (size_t i = 0; i < n; ++i) {
        double err = angular ? wrapped_abs_difference(pred[i], truth[i])
                             : pred[i] - truth[i];
        double abs_err = std::abs(err);
        abs_sum += abs_err;
        sq_sum += err * err;
        rel_sum += angular ? abs_err / 180.0 : abs_err / std::abs(truth[i]);
    }
    stats.mse = sq_sum / static_cast<double>(n);
    stats.mae = abs_sum / static_cast<double>(n);
    stats.rmse = std::sqrt(stats.mse);
    stats.mrpe_percent = 100.0 * rel_sum / static_cast<double>(n);

    double mt = mean(truth);
    double ss_tot = 0;
    for (double t : truth) ss_tot += (t - mt) * (t - mt);
    if (ss_tot == 0.0)
        fail("degenerate-truth", "R² undefined for a constant truth series");
    stats.r2 = 1.0 - sq_sum / ss_tot;

    stats.pearson = pearson_of(pred, truth);
    stats.spearman = spearman_of(pred, truth);
    return stats;
}

ConsistencyReport consistency_triples(const std::map<std::string, std::vector<double>>& vectors,
                                      const std::map<std::string, Coordinate>& coords,
                                      int n_triples, uint64_t seed) {
    std::vector<std::string> ids;
    for (const auto& [id, vec] : vectors)
        if (coords.count(id)) ids.push_back(id);
    if (ids.size() < 3)
        fail("too-few-ids", "consistency analysis needs at least 3 shared ids");
    const size_t dim = vectors.at(ids[0]).size();
    for (const auto& id : ids)
        if (vectors.at(id).size() != dim)
            fail("dimension-mismatch", "hidden vectors must share one dimension");

    auto latent_distance = [&](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0;
        for (size_t k = 0; k < dim; ++k) s += (u[k] - v[k]) * (u[k] - v[k]);
        return std::sqrt(s);
    };
    auto latent_angle = [&](const std::vector<double>& o, const std::vector<double>& u,
                            const std::vector<double>& v) -> std::pair<bool, double> {
        double dot = 0, nu = 0, nv = 0;
        for (size_t k = 0; k < dim; ++k) {
            double du = u[k] - o[k], dv = v[k] - o[k];
            dot += du * dv;
            nu += du * du;
            nv += dv * dv;
        }
        if (nu == 0.0 || nv == 0.0) return {false, 0.0};
        return {true, std::acos(std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0))};
    };
    auto physical_angle = [&](Coordinate o, Coordinate u, Coordinate v) -> std::pair<bool, double> {
        double ux = u.x - o.x, uy = u.y - o.y, vx = v.x - o.x, vy = v.y - o.y;
        double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
        if (nu == 0.0 || nv == 0.0) return {false, 0.0};
        return {true, std::acos(std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0))};
    };

    RngStream rng(seed, "consistency-triples");
    std::vector<double> lat_d, map_d, lat_a, map_a;
    lat_d.reserve(static_cast<size_t>(n_triples) * 3);
    map_d.reserve(static_cast<size_t>(n_triples) * 3);
    for (int t = 0; t < n_triples; ++t) {
        size_t i = 0, j = 0, k = 0;
        do {
            i = static_cast<size_t>(rng.next_below(ids.size()));
            j = static_cast<size_t>(rng.next_below(ids.size()));
            k = static_cast<size_t>(rng.next_below(ids.size()));
        } while (i == j || j == k || i == k);
        const auto &vi = vectors.at(ids[i]), &vj = vectors.at(ids[j]), &vk = vectors.at(ids[k]);
        Coordinate ci = coords.at(ids[i]), cj = coords.at(ids[j]), ck = coords.at(ids[k]);

        lat_d.push_back(latent_distance(vi, vj));
        map_d.push_back(euclidean(ci, cj));
        lat_d.push_back(latent_distance(vj, vk));
        map_d.push_back(euclidean(cj, ck));
        lat_d.push_back(latent_distance(vi, vk));
        map_d.push_back(euclidean(ci, ck));

        const std::array<std::array<size_t, 3>, 3> corners{{{i, j, k}, {j, i, k}, {k, i, j}}};
        for (const auto& c : corners) {
            const auto& vo = vectors.at(ids[c[0]]);
            const auto& vu = vectors.at(ids[c[1]]);
            const auto& vv = vectors.at(ids[c[2]]);
            auto [ok_lat, a_lat] = latent_angle(vo, vu, vv);
            auto [ok_map, a_map] = physical_angle(coords.at(ids[c[0]]), coords.at(ids[c[1]]),
                                                  coords.at(ids[c[2]]));
            if (ok_lat && ok_map) {
                lat_a.push_back(a_lat);
                map_a.push_back(a_map);
            }
        }
    }

    ConsistencyReport report;
    report.n_triples = n_triples;
    report.distance.pearson = pearson_of(lat_d, map_d);
    report.distance.spearman = spearman_of(lat_d, map_d);
    report.angle.pearson = pearson_of(lat_a, map_a);
    report.angle.spearman = spearman_of(lat_a, map_a);
    return report;
}

PerturbationOutcome perturbation_outcome(const GridWorld& world, Coordinate gt_start,
                                         const std::vector<PathStep>& perturbed_prefix,
                                         const std::string& continuation_text,
                                         Coordinate gt_end) {
    PerturbationOutcome outcome;
    Coordinate position = simulate_steps(world, gt_start, perturbed_prefix).end;

    pathparse::ParsedPath parsed = pathparse::parse_path(continuation_text);
    if (parsed.steps.empty()) {
        outcome.fsa = false;
        outcome.sa = 0.0;
        outcome.dd = euclidean(position, gt_end);
        return outcome;
    }

    outcome.fsa = is_valid_next_road(world, position, parsed.steps[0].road,
                                     parsed.steps[0].direction);
    position = move_along_road(world, position, parsed.steps[0]).position;

    int valid = 0, total = static_cast<int>(parsed.steps.size()) - 1;
    for (size_t i = 1; i < parsed.steps.size(); ++i) {
        if (is_valid_next_road(world, position, parsed.steps[i].road,
                               parsed.steps[i].direction))
            ++valid;
        position = move_along_road(world, position, parsed.steps[i]).position;
    }
    if (total == 0) {
        outcome.sa = 1.0;  // empty mean, vacuously true
        outcome.sa_vacuous = true;
    } else {
        outcome.sa = static_cast<double>(valid) / static_cast<double>(total);
    }
    outcome.dd = euclidean(position, gt_end);
    return outcome;
}

CaseRow score_case(const GridWorld& world, const std::string& id, const Trajectory& truth,
                   const std::string& prediction_text) {
    Coordinate gt_start = world.poi(truth.start).position;
    Coordinate gt_end = world.poi(truth.end).position;

    CaseRow row;
    row.id = id;
    SedResult sr = sed(world, gt_start, gt_end, prediction_text);
    row.spd = sr.spd;
    row.epd = sr.epd;
    row.parse_complete = sr.parsed.complete;
    row.n_steps = static_cast<int>(sr.parsed.steps.size());
    row.vrp = vrp(world, gt_start, prediction_text);
    row.spa = spa(sr.parsed, truth);
    EndpointVectors ev = endpoint_vectors(gt_start, gt_end, sr.pred_start, sr.pred_end);
    row.vmr = ev.vmr;
    row.vcs = ev.vcs;

    std::vector<Coordinate> gt_trace = truth.nodes;
    if (gt_trace.empty()) gt_trace = simulate_steps(world, gt_start, truth.steps).trace;
    row.fd = frechet(sr.pred_trace, gt_trace);

    for (const auto& diag : sr.parsed.diagnostics) {
        if (!row.diagnostics.empty()) row.diagnostics += "; ";
        row.diagnostics += diag.issue;
    }
    return row;
}

void MetricReport::finalize() {
    n_cases = static_cast<int>(rows.size());
    spd_mean = epd_mean = vrp_mean = spa_rate = vmr_mean = vcs_mean = fd_mean = 0;
    if (rows.empty()) return;
    for (const CaseRow& r : rows) {
        spd_mean += r.spd;
        epd_mean += r.epd;
        vrp_mean += r.vrp;
        spa_rate += r.spa ? 1.0 : 0.0;
        vmr_mean += r.vmr;
        vcs_mean += r.vcs;
        fd_mean += r.fd;
    }
    double n = static_cast<double>(rows.size());
    spd_mean /= n;
    epd_mean /= n;
    vrp_mean /= n;
    spa_rate /= n;
    vmr_mean /= n;
    vcs_mean /= n;
    fd_mean /= n;
}

}  // namespace gridcity::metrics
