// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "klmat/dataset.hpp"
#include "klmat/matrix.hpp"

namespace klmat {

/// User factor matrix U (m x k) and item factor matrix V (n x k).
struct FactorModel {
    Matrix U;
    Matrix V;
    int factors = 0;

    int num_users() const noexcept { return static_cast<int>(U.rows()); }
    int num_items() const noexcept { return static_cast<int>(V.rows()); }

    bool operator==(const FactorModel&) const = default;
};

struct TrainConfig {
    int factors = 10;
    double learning_rate = 0.01;
    double beta = 0.0;
    int epochs = 30;
    std::uint64_t seed = 1;
    double epsilon_guard = 1e-8;
    double init_scale = 0.1;

    /// Throws ConfigError if any field is outside its valid range.
    void validate() const;
};

/// Entries drawn uniformly from (0, init_scale], seeded. Strictly positive
/// entries keep every row norm and every initial dot product positive, which
/// the KL-regularized phase needs (it takes logs of 1/(alpha_i * U_i.V_j)).
FactorModel init_model(int num_users, int num_items, const TrainConfig& config);

/// Cosine similarity of U_i and V_j, clamped to [-1, 1].
/// Throws DegenerateFactorError if either row norm is zero.
double predict_score(const FactorModel& model, int user, int item);

/// r_max * predict_score, clipped to [0, r_max].
double predict_rating(const FactorModel& model, int user, int item, double r_max);

/// Sum over observed triplets of (R_ij/R_max - cos(U_i, V_j))^2.
double vanilla_loss(const FactorModel& model, const RatingsDataset& ds);

/// Analytic gradient of (target - cos(u, v))^2 with respect to u and v,
/// written into grad_u / grad_v (overwritten, not accumulated).
void cosine_loss_gradients(std::span<const double> u, std::span<const double> v,
                           double target, std::span<double> grad_u, std::span<double> grad_v);

/// Applies row updates U_i -= lr * grad_u, V_j -= lr * grad_v with the
/// row-norm guard: if a candidate row norm would fall below epsilon_guard,
/// that row's update is rejected and the row is re-jittered with noise at
/// init_scale/100 drawn from `rng`. Shared by the vanilla and KL-regularized
/// trainers so that beta = 0 reduces to the vanilla path bitwise.
void apply_sgd_update(FactorModel& model, const Rating& triplet, std::span<const double> grad_u,
                      std::span<const double> grad_v, double learning_rate,
                      const TrainConfig& config, std::mt19937_64& rng);

/// One SGD update on the rows touched by the triplet, using the analytic
/// cosine gradient and the guarded update rule of apply_sgd_update.
void sgd_step_vanilla(FactorModel& model, const Rating& triplet, double r_max,
                      double learning_rate, const TrainConfig& config, std::mt19937_64& rng);

/// Seeded init + `config.epochs` passes over the triplets in seeded-shuffled
/// order. Deterministic for a fixed (seed, config, data).
FactorModel train_vanilla(const RatingsDataset& train, const TrainConfig& config);

/// Continues vanilla training from an existing model for `config.epochs`
/// epochs. The shuffle generator is re-seeded from config.seed, so "train N
/// epochs, then continue E epochs" is itself a deterministic contract.
FactorModel train_vanilla(const RatingsDataset& train, const TrainConfig& config,
                          const FactorModel& warm_start);

/// Text serialization: line "m n k", then m rows of U and n rows of V,
/// space-separated with 17 significant digits (lossless round trip).
void save_model(const FactorModel& model, const std::string& path);
FactorModel load_model(const std::string& path);

}  // namespace klmat
