// SPDX-License-Identifier: Apache-2.0
#include "klmat/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "klmat/errors.hpp"

namespace klmat {

void TrainConfig::validate() const {
    if (factors < 1) throw ConfigError("factors must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be positive and finite");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be >= 0 and finite");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(epsilon_guard > 0.0)) throw ConfigError("epsilon_guard must be positive");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
        throw ConfigError("init_scale must be positive and finite");
    }
}

namespace {

void fill_uniform_positive(std::span<double> row, double scale, std::mt19937_64& rng) {
    // 1 - uniform01 lies in (0, 1], so entries stay strictly positive.
    for (double& x : row) x = scale * (1.0 - uniform01(rng));
}

double checked_norm(std::span<const double> row, int index, const char* side) {
    double n = norm(row);
    if (n == 0.0) {
        throw DegenerateFactorError(std::string(side) + " row " + std::to_string(index) +
                                    " has zero norm");
    }
    return n;
}

}  // namespace

FactorModel init_model(int num_users, int num_items, const TrainConfig& config) {
    config.validate();
    if (num_users < 1 || num_items < 1) throw ConfigError("model needs at least 1 user and item");

    FactorModel model;
    model.factors = config.factors;
    model.U = Matrix(static_cast<std::size_t>(num_users), static_cast<std::size_t>(config.factors));
    model.V = Matrix(static_cast<std::size_t>(num_items), static_cast<std::size_t>(config.factors));

    std::mt19937_64 rng(config.seed);
    fill_uniform_positive(model.U.flat(), config.init_scale, rng);
    fill_uniform_positive(model.V.flat(), config.init_scale, rng);
    return model;
}

double predict_score(const FactorModel& model, int user, int item) {
    auto u = model.U.row(static_cast<std::size_t>(user));
    auto v = model.V.row(static_cast<std::size_t>(item));
    double nu = checked_norm(u, user, "user");
    double nv = checked_norm(v, item, "item");
    double cosine = dot(u, v) / (nu * nv);
    return std::clamp(cosine, -1.0, 1.0);
}

double predict_rating(const FactorModel& model, int user, int item, double r_max) {
    return std::clamp(r_max * predict_score(model, user, item), 0.0, r_max);
}

double vanilla_loss(const FactorModel& model, const RatingsDataset& ds) {
    CompensatedSum sum;
    for (const Rating& t : ds.triplets) {
        double e = t.value / ds.r_max - predict_score(model, t.user, t.item);
        sum.add(e * e);
    }
    return sum.value();
}

void cosine_loss_gradients(std::span<const double> u, std::span<const double> v, double target,
                           std::span<double> grad_u, std::span<double> grad_v) {
    double nu = norm(u);
    double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw DegenerateFactorError("zero-norm row in gradient");
    double d = dot(u, v);
    double cosine = d / (nu * nv);
    double e = target - cosine;

    // d/du (target - cos)^2 = -2e * (v/(|u||v|) - cos * u/|u|^2), and
    // symmetrically for v.
    double cross = -2.0 * e / (nu * nv);
    double self_u = 2.0 * e * cosine / (nu * nu);
    double self_v = 2.0 * e * cosine / (nv * nv);
    for (std::size_t i = 0; i < u.size(); ++i) {
        grad_u[i] = cross * v[i] + self_u * u[i];
        grad_v[i] = cross * u[i] + self_v * v[i];
    }
}

void apply_sgd_update(FactorModel& model, const Rating& triplet, std::span<const double> grad_u,
                      std::span<const double> grad_v, double learning_rate,
                      const TrainConfig& config, std::mt19937_64& rng) {
    auto u = model.U.row(static_cast<std::size_t>(triplet.user));
    auto v = model.V.row(static_cast<std::size_t>(triplet.item));

    thread_local std::vector<double> new_u, new_v;
    new_u.assign(u.begin(), u.end());
    new_v.assign(v.begin(), v.end());
    scaled_add(new_u, -learning_rate, grad_u);
    scaled_add(new_v, -learning_rate, grad_v);

    if (norm(std::span<const double>(new_u)) < config.epsilon_guard) {
        fill_uniform_positive(u, config.init_scale / 100.0, rng);
    } else {
        std::copy(new_u.begin(), new_u.end(), u.begin());
    }
    if (norm(std::span<const double>(new_v)) < config.epsilon_guard) {
        fill_uniform_positive(v, config.init_scale / 100.0, rng);
    } else {
        std::copy(new_v.begin(), new_v.end(), v.begin());
    }
}

void sgd_step_vanilla(FactorModel& model, const Rating& triplet, double r_max,
                      double learning_rate, const TrainConfig& config, std::mt19937_64& rng) {
    auto u = model.U.row(static_cast<std::size_t>(triplet.user));
    auto v = model.V.row(static_cast<std::size_t>(triplet.item));

    thread_local std::vector<double> grad_u, grad_v;
    grad_u.resize(u.size());
    grad_v.resize(v.size());
    cosine_loss_gradients(u, v, triplet.value / r_max, grad_u, grad_v);
    apply_sgd_update(model, triplet, grad_u, grad_v, learning_rate, config, rng);
}

FactorModel train_vanilla(const RatingsDataset& train, const TrainConfig& config) {
    FactorModel model = init_model(train.num_users, train.num_items, config);
    return train_vanilla(train, config, model);
}

FactorModel train_vanilla(const RatingsDataset& train, const TrainConfig& config,
                          const FactorModel& warm_start) {
    config.validate();
    FactorModel model = warm_start;

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(train.triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        for (std::size_t idx : order) {
            sgd_step_vanilla(model, train.triplets[idx], train.r_max, config.learning_rate,
                             config, rng);
        }
    }
    return model;
}

void save_model(const FactorModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << model.num_users() << ' ' << model.num_items() << ' ' << model.factors << '\n';

    char buf[32];
    auto write_matrix = [&](const Matrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            auto row = m.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", row[j]);
                out << (j ? " " : "") << buf;
            }
            out << '\n';
        }
    };
    write_matrix(model.U);
    write_matrix(model.V);
    if (!out) throw IoError("write failed for " + path);
}

FactorModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    int m = 0, n = 0, k = 0;
    if (!(in >> m >> n >> k) || m < 1 || n < 1 || k < 1) {
        throw SchemaError(path + ": bad model header");
    }
    FactorModel model;
    model.factors = k;
    model.U = Matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(k));
    model.V = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
    for (double& x : model.U.flat()) {
        if (!(in >> x)) throw SchemaError(path + ": truncated user factors");
    }
    for (double& x : model.V.flat()) {
        if (!(in >> x)) throw SchemaError(path + ": truncated item factors");
    }
    return model;
}

}  // namespace klmat
