#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridcity/datagen.hpp"
#include "gridcity/perturb.hpp"
#include "gridcity/probe.hpp"
#include "gridcity/world.hpp"

namespace gridcity::records {

// JSON-lines serializers. Field order and number formatting are fixed so
// artifact files are byte-comparable across runs and worker counts.

std::string coordinate_json(Coordinate c);
std::string step_json(const PathStep& s);

std::string relational_line(const datagen::RelationalSample& s, std::string_view split);
std::string trajectory_line(const GridWorld& world, const datagen::TrajectorySample& s,
                            std::string_view split);
std::string region_line(const datagen::RegionQASample& s, size_t index);
std::string step_target_line(const datagen::StepProbeTarget& t, std::string_view split);
std::string perturbed_line(const GridWorld& world, const Trajectory& trajectory,
                           std::string_view traj_id, const perturb::PerturbedCase& c,
                           const std::string& prefix_text);

// Readers (schema violations carry 1-based line numbers).

struct TruthCase {
    std::string id;
    Trajectory trajectory;  // nodes left empty; recomputed on demand
};
std::vector<TruthCase> read_truth_cases(const std::string& path);

struct PerturbedTruth {
    std::string id;
    std::string start, end;           // poi ids
    std::vector<PathStep> prefix;     // steps before s_critical + replacement
};
std::vector<PerturbedTruth> read_perturbed_cases(const std::string& path);

/// {"id": ..., "text": ...} per line; duplicate ids are a schema violation.
std::unordered_map<std::string, std::string> read_predictions(const std::string& path);

/// {"id", "step": int|null, "vec": [...], "target": [...]} per line.
std::vector<probe::HiddenVectorRecord> read_hidden_vectors(const std::string& path);

// Plain file helpers.

std::string read_text_file(const std::string& path);  // throws io-failure
void write_text_file(const std::string& path, std::string_view content);

/// Buffered line writer for large JSONL artifacts.
class LineWriter {
public:
    explicit LineWriter(const std::string& path);
    ~LineWriter();
    LineWriter(const LineWriter&) = delete;
    LineWriter& operator=(const LineWriter&) = delete;

    void line(std::string_view text);
    size_t lines_written() const;
    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace gridcity::records
