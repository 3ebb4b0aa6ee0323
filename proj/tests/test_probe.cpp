#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gridcity/probe.hpp"
#include "gridcity/rng.hpp"
#include "helpers.hpp"

using namespace gridcity;
using namespace gridcity::probe;

namespace {

struct LinearSet {
    std::vector<HiddenVectorRecord> train, eval;
};

/// Shared random linear map, disjoint ids between the two slices.
LinearSet make_linear_set(int n_train, int n_eval, int d, int t, double noise,
                          uint64_t seed) {
    RngStream rng(seed, "synthetic-linear");
    std::vector<std::vector<double>> map_rows;
    for (int j = 0; j < t; ++j) {
        std::vector<double> row;
        for (int k = 0; k < d; ++k) row.push_back(rng.next_in(-1, 1));
        map_rows.push_back(row);
    }
    auto make = [&](int n, const char* prefix) {
        std::vector<HiddenVectorRecord> records;
        for (int i = 0; i < n; ++i) {
            HiddenVectorRecord rec;
            rec.id = std::string(prefix) + std::to_string(i);
            for (int k = 0; k < d; ++k) rec.vec.push_back(rng.next_in(-2, 2));
            for (int j = 0; j < t; ++j) {
                double y = 0;
                for (int k = 0; k < d; ++k)
                    y += map_rows[static_cast<size_t>(j)][static_cast<size_t>(k)] *
                         rec.vec[static_cast<size_t>(k)];
                rec.target.push_back(y + noise * rng.next_gauss());
            }
            records.push_back(std::move(rec));
        }
        return records;
    };
    LinearSet set;
    set.train = make(n_train, "tr_");
    set.eval = make(n_eval, "ev_");
    return set;
}

MlpConfig quick_config(uint64_t seed) {
    MlpConfig cfg;
    cfg.hidden_layers = {32, 16};
    cfg.max_epochs = 300;
    cfg.patience = 300;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

namespace {

/// Norm-wise relative error between the analytic gradient and central finite
/// differences. Configurations whose pre-activations sit within the FD step
/// of a ReLU kink are resampled by the caller.
double gradient_check_error(const MlpParams& params, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& Y, double alpha) {
    MlpParams analytic = mlp_gradient(params, X, Y, alpha);
    MlpParams probe = params;
    const double h = 1e-6;
    double diff_sq = 0, norm_a = 0, norm_f = 0;
    auto accumulate = [&](double* value, double analytic_g) {
        double saved = *value;
        *value = saved + h;
        double up = mlp_loss(probe, X, Y, alpha);
        *value = saved - h;
        double down = mlp_loss(probe, X, Y, alpha);
        *value = saved;
        double fd = (up - down) / (2.0 * h);
        diff_sq += (fd - analytic_g) * (fd - analytic_g);
        norm_a += analytic_g * analytic_g;
        norm_f += fd * fd;
    };
    for (size_t l = 0; l < probe.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < probe.weights[l].size(); ++i)
            accumulate(probe.weights[l].data() + i, analytic.weights[l].data()[i]);
        for (Eigen::Index i = 0; i < probe.biases[l].size(); ++i)
            accumulate(probe.biases[l].data() + i, analytic.biases[l].data()[i]);
    }
    return std::sqrt(diff_sq) / std::max(std::sqrt(std::max(norm_a, norm_f)), 1e-12);
}

/// True when every hidden pre-activation is safely away from the ReLU kink,
/// where finite differences are ill-defined.
bool away_from_kinks(const MlpParams& params, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd act = X;
    for (size_t l = 0; l + 1 < params.weights.size(); ++l) {
        Eigen::MatrixXd z = (act * params.weights[l]).rowwise() + params.biases[l].transpose();
        if (z.cwiseAbs().minCoeff() < 1e-4) return false;
        act = z.cwiseMax(0.0);
    }
    return true;
}

struct GradCheckCase {
    MlpParams params;
    Eigen::MatrixXd X, Y;
};

GradCheckCase random_gradcheck_case(RngStream& rng) {
    while (true) {
        int d = 2 + static_cast<int>(rng.next_below(3));
        int h1 = 3 + static_cast<int>(rng.next_below(3));
        int h2 = 2 + static_cast<int>(rng.next_below(3));
        int t = 1 + static_cast<int>(rng.next_below(2));
        int b = 4 + static_cast<int>(rng.next_below(4));

        GradCheckCase c;
        c.params.weights = {Eigen::MatrixXd(d, h1), Eigen::MatrixXd(h1, h2),
                            Eigen::MatrixXd(h2, t)};
        c.params.biases = {Eigen::VectorXd(h1), Eigen::VectorXd(h2), Eigen::VectorXd(t)};
        for (auto& w : c.params.weights)
            for (Eigen::Index i = 0; i < w.rows(); ++i)
                for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.next_in(-1, 1);
        for (auto& bias : c.params.biases)
            for (Eigen::Index i = 0; i < bias.size(); ++i) bias(i) = rng.next_in(-0.5, 0.5);

        c.X.resize(b, d);
        c.Y.resize(b, t);
        for (Eigen::Index i = 0; i < b; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) c.X(i, j) = rng.next_in(-2, 2);
            for (Eigen::Index j = 0; j < t; ++j) c.Y(i, j) = rng.next_in(-2, 2);
        }
        if (away_from_kinks(c.params, c.X)) return c;
    }
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    RngStream rng(4242, "gradcheck");
    for (int trial = 0; trial < 5; ++trial) {
        GradCheckCase c = random_gradcheck_case(rng);
        CHECK(gradient_check_error(c.params, c.X, c.Y, 0.0001) < 1e-5);
    }
}

TEST_CASE("mlp training is deterministic in the seed") {
    auto records = make_linear_set(80, 0, 6, 2, 0.05, 31).train;
    auto m1 = train_mlp(records, quick_config(7));
    auto m2 = train_mlp(records, quick_config(7));
    auto m3 = train_mlp(records, quick_config(8));

    std::vector<double> x(6, 0.3);
    auto p1 = m1.predict(x), p2 = m2.predict(x), p3 = m3.predict(x);
    CHECK(p1 == p2);
    CHECK(p1 != p3);
    CHECK(m1.summary.epochs_run == m2.summary.epochs_run);
    CHECK(m1.summary.best_validation_loss == m2.summary.best_validation_loss);
}

TEST_CASE("mlp recovers a noisy linear map") {
    auto set = make_linear_set(400, 100, 8, 2, 0.1, 11);
    auto model = train_mlp(set.train, quick_config(3));
    auto result = evaluate_probe(model, set.eval);
    REQUIRE(result.per_dim.size() == 2);
    for (const auto& stats : result.per_dim) CHECK(stats.r2 >= 0.95);
}

TEST_CASE("mlp fits constant targets") {
    RngStream rng(5, "const-targets");
    std::vector<HiddenVectorRecord> records;
    for (int i = 0; i < 120; ++i) {
        HiddenVectorRecord rec;
        rec.id = "c_" + std::to_string(i);
        for (int k = 0; k < 4; ++k) rec.vec.push_back(rng.next_in(-1, 1));
        rec.target = {0.7};
        records.push_back(rec);
    }
    MlpConfig cfg = quick_config(2);
    cfg.batch_cap = 16;   // small set: more optimizer steps per epoch
    cfg.max_epochs = 500;
    cfg.patience = 500;
    auto model = train_mlp(records, cfg);
    double mae = 0;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x;
        for (int k = 0; k < 4; ++k) x.push_back(rng.next_in(-1, 1));
        mae += std::abs(model.predict(x)[0] - 0.7);
    }
    mae /= 20;
    CHECK(mae < 0.05);
}

TEST_CASE("mlp validation guards") {
    auto few = make_linear_set(10, 0, 4, 1, 0.0, 1).train;
    CHECK_THROWS_WITH_AS(train_mlp(few, quick_config(1)),
                         doctest::Contains("too-few-records"), Error);

    auto records = make_linear_set(30, 0, 4, 1, 0.0, 1).train;
    records[3].vec.push_back(1.0);
    CHECK_THROWS_WITH_AS(train_mlp(records, quick_config(1)),
                         doctest::Contains("dimension-mismatch"), Error);

    MlpConfig bad = quick_config(1);
    bad.patience = bad.max_epochs + 1;
    CHECK_THROWS_WITH_AS(train_mlp(make_linear_set(40, 0, 4, 1, 0.0, 1).train, bad),
                         doctest::Contains("configuration-invalid"), Error);
}

TEST_CASE("linear probe interpolates exact linear data") {
    auto set = make_linear_set(60, 40, 5, 2, 0.0, 21);
    auto model = train_linear(set.train);
    CHECK_FALSE(model.summary.rank_deficient);
    auto result = evaluate_probe(model, set.eval);
    CHECK(result.euclid_mean < 1e-8);
    for (const auto& stats : result.per_dim) CHECK(stats.r2 == doctest::Approx(1.0));
}

TEST_CASE("linear probe trails the mlp on quadratic targets") {
    RngStream rng(77, "quadratic");
    auto make = [&](int n, const char* prefix) {
        std::vector<HiddenVectorRecord> records;
        for (int i = 0; i < n; ++i) {
            HiddenVectorRecord rec;
            rec.id = std::string(prefix) + std::to_string(i);
            for (int k = 0; k < 4; ++k) rec.vec.push_back(rng.next_in(-2, 2));
            double q = rec.vec[0] * rec.vec[0] + 0.5 * rec.vec[1] * rec.vec[2] -
                       rec.vec[3] * rec.vec[3];
            rec.target = {q};
            records.push_back(rec);
        }
        return records;
    };
    auto train = make(500, "tr_");
    auto eval = make(200, "ev_");

    auto linear = train_linear(train);
    auto mlp = train_mlp(train, quick_config(13));
    double linear_r2 = evaluate_probe(linear, eval).per_dim[0].r2;
    double mlp_r2 = evaluate_probe(mlp, eval).per_dim[0].r2;
    CHECK(mlp_r2 > linear_r2);
    CHECK(mlp_r2 > 0.8);
}

TEST_CASE("duplicate feature column is rank deficient, solved minimum-norm") {
    RngStream rng(3, "rankdef");
    std::vector<HiddenVectorRecord> records;
    for (int i = 0; i < 50; ++i) {
        HiddenVectorRecord rec;
        rec.id = "r_" + std::to_string(i);
        double a = rng.next_in(-1, 1), b = rng.next_in(-1, 1);
        rec.vec = {a, b, a};  // duplicated column
        rec.target = {2.0 * a + b};
        records.push_back(rec);
    }
    auto model = train_linear(records);
    CHECK(model.summary.rank_deficient);
    CHECK(model.summary.rank < 4);
    std::vector<double> probe_x{0.5, 0.25, 0.5};
    CHECK(model.predict(probe_x)[0] == doctest::Approx(1.25).epsilon(1e-8));
}

TEST_CASE("probe hygiene: train/eval overlap is rejected") {
    auto records = make_linear_set(40, 0, 4, 1, 0.0, 9).train;
    auto model = train_linear(records);
    CHECK_THROWS_WITH_AS(evaluate_probe(model, {records[0]}),
                         doctest::Contains("train-test-overlap"), Error);
}

TEST_CASE("isometric embeddings probe to sub-0.01 km error") {
    WorldConfig cfg;
    cfg.grid_size = 50;
    cfg.n_poi = 220;
    cfg.seed = 123;
    GridWorld world = GridWorld::build(cfg);

    const int d = 16;
    std::vector<HiddenVectorRecord> train, eval;
    for (size_t i = 0; i < world.pois().size(); ++i) {
        const Poi& p = world.pois()[i];
        HiddenVectorRecord rec;
        rec.id = p.id;
        rec.vec.assign(d, 0.0);
        rec.vec[0] = p.position.x;
        rec.vec[1] = p.position.y;
        rec.target = {p.position.x, p.position.y};
        (i < 200 ? train : eval).push_back(std::move(rec));
    }

    auto linear = train_linear(train);
    CHECK(evaluate_probe(linear, eval).euclid_mean < 0.01);

    MlpConfig cfg_mlp;  // small set: smaller batches, longer run
    cfg_mlp.batch_cap = 32;
    cfg_mlp.max_epochs = 1500;
    cfg_mlp.patience = 1500;
    cfg_mlp.seed = 4;
    auto mlp = train_mlp(train, cfg_mlp);
    CHECK(evaluate_probe(mlp, eval).euclid_mean < 0.01);
}

TEST_CASE("pair features concatenate and target world geometry") {
    GridWorld world = testutil::make_world(10, {{0, 0}, {3, 4}});
    HiddenVectorRecord a{"p_1", std::nullopt, {1, 2}, {}};
    HiddenVectorRecord b{"p_2", std::nullopt, {3, 4}, {}};

    auto ab = pair_features(world, a, b);
    CHECK(ab.id == "p_1|p_2");
    CHECK(ab.vec == std::vector<double>{1, 2, 3, 4});
    REQUIRE(ab.target.size() == 2);
    CHECK(ab.target[0] == doctest::Approx(5.0));

    auto ba = pair_features(world, b, a);
    CHECK(ba.target[0] == doctest::Approx(ab.target[0]));
    double wrapped = ab.target[1] + 180.0;
    if (wrapped > 180.0) wrapped -= 360.0;
    CHECK(ba.target[1] == doctest::Approx(wrapped));

    CHECK_THROWS_WITH_AS(pair_features(world, a, a), doctest::Contains("coincident-points"),
                         Error);
    HiddenVectorRecord short_vec{"p_2", std::nullopt, {1}, {}};
    CHECK_THROWS_WITH_AS(pair_features(world, a, short_vec),
                         doctest::Contains("dimension-mismatch"), Error);
}

TEST_CASE("model save/load round trip") {
    namespace fs = std::filesystem;
    auto records = make_linear_set(60, 0, 5, 2, 0.05, 17).train;
    fs::path dir = fs::temp_directory_path() / "gridcity_probe_test";
    fs::create_directories(dir);

    auto mlp = train_mlp(records, quick_config(5));
    fs::path mlp_path = dir / "probe_mlp.bin";
    mlp.save(mlp_path.string());
    auto mlp_back = RegressorModel::load(mlp_path.string());
    std::vector<double> x{0.1, -0.4, 0.9, 0.0, 0.3};
    CHECK(mlp.predict(x) == mlp_back.predict(x));
    CHECK(mlp_back.train_ids == mlp.train_ids);
    CHECK(mlp_back.config.hidden_layers == mlp.config.hidden_layers);

    auto linear = train_linear(records);
    fs::path lin_path = dir / "probe_linear.bin";
    linear.save(lin_path.string());
    auto lin_back = RegressorModel::load(lin_path.string());
    CHECK(linear.predict(x) == lin_back.predict(x));

    fs::remove_all(dir);
}
