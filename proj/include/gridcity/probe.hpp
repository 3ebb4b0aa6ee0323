#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "gridcity/metrics.hpp"
#include "gridcity/world.hpp"

namespace gridcity::probe {

/// One supervision unit: a hidden-state vector exported by an external LLM
/// for a POI name or a navigation prefix, plus its regression target.
struct HiddenVectorRecord {
    std::string id;            // POI id, or "<traj>#<step>"
    std::optional<int> step;
    std::vector<double> vec;
    std::vector<double> target;
};

struct MlpConfig {
    std::vector<int> hidden_layers{128, 64};  // ReLU activations
    double learning_rate = 0.001;             // Adam initial rate
    double l2_alpha = 0.0001;
    int max_epochs = 500;
    int patience = 100;          // early stopping on validation loss
    int lr_patience = 10;        // epochs without improvement before lr /= 5
    double lr_factor = 0.2;
    double lr_floor = 1e-6;
    double validation_fraction = 0.10;
    int batch_cap = 200;         // batch = min(batch_cap, n_train)
    uint64_t seed = 0;

    void validate() const;
};

struct MlpParams {
    std::vector<Eigen::MatrixXd> weights;  // layer l: fan_in x fan_out
    std::vector<Eigen::VectorXd> biases;
};

struct TrainingSummary {
    int epochs_run = 0;
    double best_validation_loss = 0.0;
    double final_learning_rate = 0.0;
    bool rank_deficient = false;  // linear probe only
    int rank = -1;
};

enum class RegressorKind : uint8_t { mlp, linear };

class RegressorModel {
public:
    RegressorKind kind = RegressorKind::mlp;
    int input_dim = 0;
    int target_dim = 0;
    MlpParams mlp;               // populated for kind == mlp
    Eigen::MatrixXd linear;      // (input_dim + 1) x target_dim, intercept last row
    MlpConfig config;            // echo (mlp)
    TrainingSummary summary;
    std::unordered_set<std::string> train_ids;

    std::vector<double> predict(const std::vector<double>& vec) const;
    Eigen::MatrixXd predict_matrix(const Eigen::MatrixXd& X) const;

    /// Versioned binary save file with a JSON config echo header.
    void save(const std::string& path) const;
    static RegressorModel load(const std::string& path);
};

/// Mini-batch Adam training with L2 penalty, per-epoch shuffling, a held-out
/// validation slice, early stopping, and step-down learning-rate adjustment.
/// Deterministic in config.seed. Throws too-few-records / dimension-mismatch.
RegressorModel train_mlp(const std::vector<HiddenVectorRecord>& records,
                         const MlpConfig& config);

/// Least-squares fit with intercept via SVD; rank deficiency is reported in
/// the summary and solved in the minimum-norm sense.
RegressorModel train_linear(const std::vector<HiddenVectorRecord>& records);

struct ProbeEvaluation {
    std::vector<metrics::RegressionStats> per_dim;
    double euclid_mean = 0.0;  // mean prediction-to-target distance
    double euclid_std = 0.0;
    int n = 0;
};

/// Evaluate on records disjoint (by id) from the training set; the overlap
/// check is enforced, not assumed. angular_dims marks wrapped-degree targets.
ProbeEvaluation evaluate_probe(const RegressorModel& model,
                               const std::vector<HiddenVectorRecord>& records,
                               const std::vector<bool>& angular_dims = {});

/// Concatenated pair feature (a then b) with target [distance_km,
/// azimuth_deg] from world geometry. Throws dimension-mismatch and, for
/// coincident POIs, coincident-points.
HiddenVectorRecord pair_features(const GridWorld& world, const HiddenVectorRecord& rec_a,
                                 const HiddenVectorRecord& rec_b);

// Exposed for gradient verification: loss and its analytic gradient for a
// full batch. ReLU activations on every layer except the output.
double mlp_loss(const MlpParams& params, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                double alpha);
MlpParams mlp_gradient(const MlpParams& params, const Eigen::MatrixXd& X,
                       const Eigen::MatrixXd& Y, double alpha);

}  // namespace gridcity::probe
