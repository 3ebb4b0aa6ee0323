#include "gridcity/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "gridcity/rng.hpp"

namespace gridcity::probe {

namespace {

struct Dataset {
    Eigen::MatrixXd X, Y;
    std::vector<std::string> ids;
};

Dataset to_dataset(const std::vector<HiddenVectorRecord>& records) {
    if (records.empty()) fail("too-few-records", "no records supplied");
    const size_t d = records[0].vec.size();
    const size_t t = records[0].target.size();
    Dataset data;
    data.X.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(d));
    data.Y.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(t));
    data.ids.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].vec.size() != d || records[i].target.size() != t)
            fail("dimension-mismatch", "records must share vector and target dimensions");
        for (size_t j = 0; j < d; ++j)
            data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                records[i].vec[j];
        for (size_t j = 0; j < t; ++j)
            data.Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                records[i].target[j];
        data.ids.push_back(records[i].id);
    }
    return data;
}

struct Forward {
    std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
    std::vector<Eigen::MatrixXd> act;   // post-activation (act[0] = input)
};

Forward forward_pass(const MlpParams& params, const Eigen::MatrixXd& X) {
    Forward f;
    f.act.push_back(X);
    const size_t L = params.weights.size();
    for (size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd z =
            (f.act.back() * params.weights[l]).rowwise() + params.biases[l].transpose();
        f.pre.push_back(z);
        if (l + 1 < L)
            f.act.push_back(z.cwiseMax(0.0));
        else
            f.act.push_back(std::move(z));
    }
    return f;
}

double squared_weight_norm(const MlpParams& params) {
    double s = 0.0;
    for (const auto& w : params.weights) s += w.squaredNorm();
    return s;
}

MlpParams init_params(const std::vector<int>& sizes, uint64_t seed) {
    MlpParams params;
    RngStream rng(seed, "mlp-init");
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        double bound = std::sqrt(6.0 / static_cast<double>(sizes[l]));
        Eigen::MatrixXd w(sizes[l], sizes[l + 1]);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.next_in(-bound, bound);
        params.weights.push_back(std::move(w));
        params.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    }
    return params;
}

double validation_mse(const MlpParams& params, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& Y) {
    Forward f = forward_pass(params, X);
    return (f.act.back() - Y).squaredNorm() /
           static_cast<double>(X.rows() * Y.cols());
}

}  // namespace

void MlpConfig::validate() const {
    if (hidden_layers.empty()) fail("configuration-invalid", "mlp needs hidden layers");
    for (int h : hidden_layers)
        if (h <= 0) fail("configuration-invalid", "hidden layer sizes must be positive");
    if (learning_rate <= 0 || l2_alpha < 0 || max_epochs <= 0 || patience <= 0 ||
        lr_patience <= 0 || lr_factor <= 0 || lr_factor >= 1 || lr_floor <= 0 ||
        validation_fraction <= 0 || validation_fraction >= 1 || batch_cap <= 0)
        fail("configuration-invalid", "mlp config values out of range");
    if (patience > max_epochs)
        fail("configuration-invalid", "patience must not exceed max_epochs");
}

double mlp_loss(const MlpParams& params, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                double alpha) {
    const double b = static_cast<double>(X.rows());
    Forward f = forward_pass(params, X);
    return (f.act.back() - Y).squaredNorm() / (2.0 * b) +
           alpha * squared_weight_norm(params) / (2.0 * b);
}

MlpParams mlp_gradient(const MlpParams& params, const Eigen::MatrixXd& X,
                       const Eigen::MatrixXd& Y, double alpha) {
    const double b = static_cast<double>(X.rows());
    const size_t L = params.weights.size();
    Forward f = forward_pass(params, X);

    MlpParams grad;
    grad.weights.resize(L);
    grad.biases.resize(L);

    Eigen::MatrixXd delta = (f.act.back() - Y) / b;
    for (size_t l = L; l-- > 0;) {
        grad.weights[l] = f.act[l].transpose() * delta + (alpha / b) * params.weights[l];
        grad.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = (delta * params.weights[l].transpose()).eval();
            delta = delta.cwiseProduct(
                (f.pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return grad;
}

RegressorModel train_mlp(const std::vector<HiddenVectorRecord>& records,
                         const MlpConfig& config) {
    config.validate();
    if (records.size() < 20) fail("too-few-records", "mlp training needs at least 20 records");
    Dataset data = to_dataset(records);

    const int n = static_cast<int>(data.X.rows());
    const int d = static_cast<int>(data.X.cols());
    const int t = static_cast<int>(data.Y.cols());

    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    RngStream split_rng(config.seed, "mlp-val-split");
    split_rng.shuffle(order);
    int n_val = std::max(1, static_cast<int>(std::lround(config.validation_fraction * n)));
    int n_train = n - n_val;
    if (n_train < 1) fail("too-few-records", "validation split leaves no training data");

    auto take_rows = [&](int from, int count) {
        Eigen::MatrixXd xs(count, d), ys(count, t);
        for (int i = 0; i < count; ++i) {
            xs.row(i) = data.X.row(order[static_cast<size_t>(from + i)]);
            ys.row(i) = data.Y.row(order[static_cast<size_t>(from + i)]);
        }
        return std::make_pair(std::move(xs), std::move(ys));
    };
    auto [val_x, val_y] = take_rows(0, n_val);
    auto [train_x, train_y] = take_rows(n_val, n_train);

    std::vector<int> sizes;
    sizes.push_back(d);
    for (int h : config.hidden_layers) sizes.push_back(h);
    sizes.push_back(t);
    MlpParams params = init_params(sizes, config.seed);

    // Adam state
    MlpParams m, v;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        m.weights.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(),
                                                  params.weights[l].cols()));
        v.weights.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(),
                                                  params.weights[l].cols()));
        m.biases.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
        v.biases.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int64_t step = 0;
    double lr = config.learning_rate;

    const int batch = std::min(config.batch_cap, n_train);
    std::vector<int> train_order(static_cast<size_t>(n_train));
    for (int i = 0; i < n_train; ++i) train_order[static_cast<size_t>(i)] = i;

    MlpParams best = params;
    double best_val = validation_mse(params, val_x, val_y);
    double best_for_lr = best_val;
    int epochs_run = 0, stop_counter = 0, lr_counter = 0;
    RngStream epoch_rng(config.seed, "mlp-epochs");

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        epochs_run = epoch + 1;
        epoch_rng.shuffle(train_order);
        for (int begin = 0; begin < n_train; begin += batch) {
            int count = std::min(batch, n_train - begin);
            Eigen::MatrixXd bx(count, d), by(count, t);
            for (int i = 0; i < count; ++i) {
                bx.row(i) = train_x.row(train_order[static_cast<size_t>(begin + i)]);
                by.row(i) = train_y.row(train_order[static_cast<size_t>(begin + i)]);
            }
            MlpParams grad = mlp_gradient(params, bx, by, config.l2_alpha);
            ++step;
            double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (size_t l = 0; l < params.weights.size(); ++l) {
                m.weights[l] = beta1 * m.weights[l] + (1.0 - beta1) * grad.weights[l];
                v.weights[l] =
                    beta2 * v.weights[l] + (1.0 - beta2) * grad.weights[l].cwiseAbs2();
                params.weights[l].array() -=
                    lr * (m.weights[l].array() / bc1) /
                    ((v.weights[l].array() / bc2).sqrt() + eps);
                m.biases[l] = beta1 * m.biases[l] + (1.0 - beta1) * grad.biases[l];
                v.biases[l] = beta2 * v.biases[l] + (1.0 - beta2) * grad.biases[l].cwiseAbs2();
                params.biases[l].array() -=
                    lr * (m.biases[l].array() / bc1) /
                    ((v.biases[l].array() / bc2).sqrt() + eps);
            }
        }

        double val = validation_mse(params, val_x, val_y);
        if (val < best_val) {
            best_val = val;
            best = params;
            stop_counter = 0;
        } else {
            ++stop_counter;
        }
        // LR steps down on plateaus; a relative tolerance keeps microscopic
        // late-stage gains from blocking the decay.
        if (val < best_for_lr * (1.0 - 1e-4)) {
            best_for_lr = val;
            lr_counter = 0;
        } else {
            ++lr_counter;
        }
        if (lr_counter >= config.lr_patience && lr > config.lr_floor) {
            lr = std::max(lr * config.lr_factor, config.lr_floor);
            lr_counter = 0;
        }
        if (stop_counter >= config.patience) break;
    }

    RegressorModel model;
    model.kind = RegressorKind::mlp;
    model.input_dim = d;
    model.target_dim = t;
    model.mlp = std::move(best);
    model.config = config;
    model.summary.epochs_run = epochs_run;
    model.summary.best_validation_loss = best_val;
    model.summary.final_learning_rate = lr;
    for (const auto& rec : records) model.train_ids.insert(rec.id);
    return model;
}

RegressorModel train_linear(const std::vector<HiddenVectorRecord>& records) {
    Dataset data = to_dataset(records);
    const int d = static_cast<int>(data.X.cols());
    if (static_cast<int>(records.size()) < d + 1)
        fail("too-few-records", "linear probe needs at least input_dim + 1 records");

    Eigen::MatrixXd design(data.X.rows(), d + 1);
    design.leftCols(d) = data.X;
    design.col(d).setOnes();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    RegressorModel model;
    model.kind = RegressorKind::linear;
    model.input_dim = d;
    model.target_dim = static_cast<int>(data.Y.cols());
    model.linear = svd.solve(data.Y);  // minimum-norm when rank deficient
    model.summary.rank = static_cast<int>(svd.rank());
    model.summary.rank_deficient = svd.rank() < d + 1;
    for (const auto& rec : records) model.train_ids.insert(rec.id);
    return model;
}

Eigen::MatrixXd RegressorModel::predict_matrix(const Eigen::MatrixXd& X) const {
    if (kind == RegressorKind::mlp) {
        Forward f = forward_pass(mlp, X);
        return f.act.back();
    }
    Eigen::MatrixXd design(X.rows(), input_dim + 1);
    design.leftCols(input_dim) = X;
    design.col(input_dim).setOnes();
    return design * linear;
}

std::vector<double> RegressorModel::predict(const std::vector<double>& vec) const {
    if (static_cast<int>(vec.size()) != input_dim)
        fail("dimension-mismatch", "input vector has unexpected dimension");
    Eigen::MatrixXd x(1, input_dim);
    for (int j = 0; j < input_dim; ++j) x(0, j) = vec[static_cast<size_t>(j)];
    Eigen::MatrixXd p = predict_matrix(x);
    std::vector<double> out(static_cast<size_t>(target_dim));
    for (int j = 0; j < target_dim; ++j) out[static_cast<size_t>(j)] = p(0, j);
    return out;
}

ProbeEvaluation evaluate_probe(const RegressorModel& model,
                               const std::vector<HiddenVectorRecord>& records,
                               const std::vector<bool>& angular_dims) {
    for (const auto& rec : records)
        if (model.train_ids.count(rec.id))
            fail("train-test-overlap", "evaluation id '" + rec.id + "' was used in training");
    Dataset data = to_dataset(records);
    if (static_cast<int>(data.X.cols()) != model.input_dim)
        fail("dimension-mismatch", "evaluation vectors do not match the model input");

    Eigen::MatrixXd pred = model.predict_matrix(data.X);
    ProbeEvaluation eval;
    eval.n = static_cast<int>(data.X.rows());
    for (int j = 0; j < model.target_dim; ++j) {
        std::vector<double> p(static_cast<size_t>(eval.n)), y(static_cast<size_t>(eval.n));
        for (int i = 0; i < eval.n; ++i) {
            p[static_cast<size_t>(i)] = pred(i, j);
            y[static_cast<size_t>(i)] = data.Y(i, j);
        }
        bool angular = j < static_cast<int>(angular_dims.size()) && angular_dims[static_cast<size_t>(j)];
        eval.per_dim.push_back(metrics::regression_stats(p, y, angular));
    }

    double sum = 0, sum_sq = 0;
    for (int i = 0; i < eval.n; ++i) {
        double e = (pred.row(i) - data.Y.row(i)).norm();
        sum += e;
        sum_sq += e * e;
    }
    eval.euclid_mean = sum / eval.n;
    eval.euclid_std = std::sqrt(std::max(0.0, sum_sq / eval.n - eval.euclid_mean * eval.euclid_mean));
    return eval;
}

HiddenVectorRecord pair_features(const GridWorld& world, const HiddenVectorRecord& rec_a,
                                 const HiddenVectorRecord& rec_b) {
    if (rec_a.vec.size() != rec_b.vec.size())
        fail("dimension-mismatch", "pair features require equal vector dimensions");
    const Poi& a = world.poi(rec_a.id);
    const Poi& b = world.poi(rec_b.id);
    HiddenVectorRecord out;
    out.id = rec_a.id + "|" + rec_b.id;
    out.vec = rec_a.vec;
    out.vec.insert(out.vec.end(), rec_b.vec.begin(), rec_b.vec.end());
    out.target = {euclidean(a.position, b.position),
                  azimuth_degrees(a.position, b.position)};
    return out;
}

// ---------------------------------------------------------------------------
// Save / load: "GCPR" magic, version, JSON header, raw little-endian doubles.

namespace {

void write_doubles(std::ofstream& out, const double* data, size_t count) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, size_t count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) fail("schema-violation", "model file truncated");
}

}  // namespace

void RegressorModel::save(const std::string& path) const {
    nlohmann::ordered_json header;
    header["kind"] = kind == RegressorKind::mlp ? "mlp" : "linear";
    header["input_dim"] = input_dim;
    header["target_dim"] = target_dim;
    if (kind == RegressorKind::mlp) {
        header["hidden_layers"] = config.hidden_layers;
        header["config"] = {{"learning_rate", config.learning_rate},
                            {"l2_alpha", config.l2_alpha},
                            {"max_epochs", config.max_epochs},
                            {"patience", config.patience},
                            {"lr_patience", config.lr_patience},
                            {"lr_factor", config.lr_factor},
                            {"lr_floor", config.lr_floor},
                            {"validation_fraction", config.validation_fraction},
                            {"batch_cap", config.batch_cap},
                            {"seed", config.seed}};
    }
    header["summary"] = {{"epochs_run", summary.epochs_run},
                         {"best_validation_loss", summary.best_validation_loss},
                         {"final_learning_rate", summary.final_learning_rate},
                         {"rank_deficient", summary.rank_deficient},
                         {"rank", summary.rank}};
    std::vector<std::string> ids(train_ids.begin(), train_ids.end());
    std::sort(ids.begin(), ids.end());
    header["train_ids"] = ids;

    std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io-failure", "cannot open '" + path + "' for writing");
    out.write("GCPR", 4);
    uint32_t version = 1;
    uint64_t header_len = header_text.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

    if (kind == RegressorKind::mlp) {
        for (size_t l = 0; l < mlp.weights.size(); ++l) {
            write_doubles(out, mlp.weights[l].data(),
                          static_cast<size_t>(mlp.weights[l].size()));
            write_doubles(out, mlp.biases[l].data(), static_cast<size_t>(mlp.biases[l].size()));
        }
    } else {
        write_doubles(out, linear.data(), static_cast<size_t>(linear.size()));
    }
    if (!out) fail("io-failure", "failed writing model file '" + path + "'");
}

RegressorModel RegressorModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-failure", "cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "GCPR")
        fail("schema-violation", "not a model file: '" + path + "'");
    uint32_t version = 0;
    uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    if (!in || version != 1) fail("schema-violation", "unsupported model file version");
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) fail("schema-violation", "model file truncated");

    nlohmann::json header = nlohmann::json::parse(header_text);
    RegressorModel model;
    model.kind = header.at("kind") == "mlp" ? RegressorKind::mlp : RegressorKind::linear;
    model.input_dim = header.at("input_dim").get<int>();
    model.target_dim = header.at("target_dim").get<int>();
    model.summary.epochs_run = header.at("summary").at("epochs_run").get<int>();
    model.summary.best_validation_loss =
        header.at("summary").at("best_validation_loss").get<double>();
    model.summary.final_learning_rate =
        header.at("summary").at("final_learning_rate").get<double>();
    model.summary.rank_deficient = header.at("summary").at("rank_deficient").get<bool>();
    model.summary.rank = header.at("summary").at("rank").get<int>();
    for (const auto& id : header.at("train_ids")) model.train_ids.insert(id.get<std::string>());

    if (model.kind == RegressorKind::mlp) {
        model.config.hidden_layers = header.at("hidden_layers").get<std::vector<int>>();
        const auto& cfg = header.at("config");
        model.config.learning_rate = cfg.at("learning_rate").get<double>();
        model.config.l2_alpha = cfg.at("l2_alpha").get<double>();
        model.config.max_epochs = cfg.at("max_epochs").get<int>();
        model.config.patience = cfg.at("patience").get<int>();
        model.config.lr_patience = cfg.at("lr_patience").get<int>();
        model.config.lr_factor = cfg.at("lr_factor").get<double>();
        model.config.lr_floor = cfg.at("lr_floor").get<double>();
        model.config.validation_fraction = cfg.at("validation_fraction").get<double>();
        model.config.batch_cap = cfg.at("batch_cap").get<int>();
        model.config.seed = cfg.at("seed").get<uint64_t>();
        std::vector<int> sizes;
        sizes.push_back(model.input_dim);
        for (int h : model.config.hidden_layers) sizes.push_back(h);
        sizes.push_back(model.target_dim);
        for (size_t l = 0; l + 1 < sizes.size(); ++l) {
            Eigen::MatrixXd w(sizes[l], sizes[l + 1]);
            Eigen::VectorXd b(sizes[l + 1]);
            read_doubles(in, w.data(), static_cast<size_t>(w.size()));
            read_doubles(in, b.data(), static_cast<size_t>(b.size()));
            model.mlp.weights.push_back(std::move(w));
            model.mlp.biases.push_back(std::move(b));
        }
    } else {
        model.linear.resize(model.input_dim + 1, model.target_dim);
        read_doubles(in, model.linear.data(), static_cast<size_t>(model.linear.size()));
    }
    return model;
}

}  // namespace gridcity::probe
