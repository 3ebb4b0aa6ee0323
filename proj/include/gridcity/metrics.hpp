#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gridcity/pathparse.hpp"
#include "gridcity/routing.hpp"
#include "gridcity/world.hpp"

namespace gridcity::metrics {

/// Start-End Deviation: parse the text, estimate the start (intersection of
/// the first two roads backtracked along step one; ground-truth fallback for
/// short or indeterminate descriptions), simulate every step for the end.
struct SedResult {
    double spd = 0.0;  // |pred_start - gt_start|
    double epd = 0.0;  // |pred_end - gt_end|
    Coordinate pred_start, pred_end;
    std::vector<Coordinate> pred_trace;  // simulated node trace
    pathparse::ParsedPath parsed;
    bool start_fallback = false;  // predicted start fell back to ground truth
};

SedResult sed(const GridWorld& world, Coordinate gt_start, Coordinate gt_end,
              const std::string& text);

/// Valid Road Proportion: share of parsed steps that pick a legal
/// (road, direction) at their simulated departure point; 0 for empty parses.
double vrp(const GridWorld& world, Coordinate gt_start, const std::string& text);

/// Shortest Path Accuracy: complete parse and step-exact match.
bool spa(const pathparse::ParsedPath& predicted, const Trajectory& truth);

struct EndpointVectors {
    double vmr = 0.0;        // |pred displacement| / |gt displacement|
    double vcs = 0.0;        // cosine of the two displacement vectors
    bool vcs_defined = true; // false (and vcs scored 0) for zero predicted displacement
};

/// Throws degenerate-ground-truth when the ground-truth displacement is zero.
EndpointVectors endpoint_vectors(Coordinate gt_start, Coordinate gt_end, Coordinate pred_start,
                                 Coordinate pred_end);

/// Discrete Fréchet distance between node traces (Euclidean ground metric).
/// Throws empty-path.
double frechet(std::span<const Coordinate> path_a, std::span<const Coordinate> path_b);

struct RegressionStats {
    double mse = 0, mae = 0, rmse = 0, r2 = 0, mrpe_percent = 0, spearman = 0, pearson = 0;
};

/// Standard regression metrics. With angular=true the error of each pair is
/// the absolute difference wrapped into [0, 180] and the MRPE denominator is
/// 180 degrees (bounded and zero-safe, unlike a naive relative error on a
/// wrapped quantity). Throws length-mismatch / degenerate-truth.
RegressionStats regression_stats(std::span<const double> pred, std::span<const double> truth,
                                 bool angular = false);

struct CorrelationPair {
    double spearman = 0.0;
    double pearson = 0.0;
};

struct ConsistencyReport {
    CorrelationPair distance;  // latent pair distances vs map distances
    CorrelationPair angle;     // latent triple angles vs physical angles
    int n_triples = 0;
};

/// Sample distinct POI triples; pool latent-vs-map distances and
/// vertex angles; return rank and linear correlations over the pools.
/// Throws too-few-ids / dimension-mismatch.
ConsistencyReport consistency_triples(const std::map<std::string, std::vector<double>>& vectors,
                                      const std::map<std::string, Coordinate>& coords,
                                      int n_triples, uint64_t seed);

struct PerturbationOutcome {
    bool fsa = false;        // first continuation step legal at the perturbed position
    double sa = 0.0;         // legality proportion over the remaining steps
    bool sa_vacuous = false; // single-step continuation: SA is an empty mean, reported 1.0
    double dd = 0.0;         // |final simulated position - gt_end|
};

PerturbationOutcome perturbation_outcome(const GridWorld& world, Coordinate gt_start,
                                         const std::vector<PathStep>& perturbed_prefix,
                                         const std::string& continuation_text,
                                         Coordinate gt_end);

/// Per-case scoring row for the path prediction task.
struct CaseRow {
    std::string id;
    double spd = 0, epd = 0, vrp = 0;
    bool spa = false;
    double vmr = 0, vcs = 0, fd = 0;
    bool parse_complete = false;
    int n_steps = 0;
    std::string diagnostics;  // "; "-joined parser notes
};

struct MetricReport {
    std::vector<CaseRow> rows;
    // Aggregates are arithmetic means of the rows (SPA/VRP as proportions).
    double spd_mean = 0, epd_mean = 0, vrp_mean = 0, spa_rate = 0;
    double vmr_mean = 0, vcs_mean = 0, fd_mean = 0;
    int n_cases = 0;

    void finalize();  // recompute aggregates from rows
};

/// Score one prediction text against a ground-truth trajectory.
CaseRow score_case(const GridWorld& world, const std::string& id, const Trajectory& truth,
                   const std::string& prediction_text);

}  // namespace gridcity::metrics
