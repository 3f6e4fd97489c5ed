// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "klmat/factorization.hpp"
#include "klmat/rank_alpha.hpp"

namespace klmat {

/// Per-sample symbols of the KL-regularized loss. alpha_i is the trained
/// weight of the sample's user; num_items is n, the support size of the
/// uniform target.
struct KlmatSampleContext {
    int user = 0;
    int item = 0;
    double rating = 0.0;
    double alpha_i = 0.0;
    int num_items = 1;
    double beta = 0.0;
    double r_max = 1.0;
    double epsilon_guard = 1e-8;
};

/// (R/R_max - cos(u,v))^2 + beta * (p - q)(ln p - ln q) with
/// p = 1/(alpha_i * u.v) and q = 1/n.
///
/// When alpha_i * u.v <= epsilon_guard the regularizer is evaluated at the
/// clamp point alpha_i * u.v = epsilon_guard, which keeps the loss finite and
/// makes its gradient zero throughout the clamped region.
double klmat_sample_loss(const KlmatSampleContext& ctx, std::span<const double> u,
                         std::span<const double> v);

/// Analytic gradient of klmat_sample_loss, written into grad_u / grad_v.
/// With beta == 0 the arithmetic path is exactly the vanilla gradient, so the
/// two coincide bitwise.
void klmat_gradients(const KlmatSampleContext& ctx, std::span<const double> u,
                     std::span<const double> v, std::span<double> grad_u,
                     std::span<double> grad_v);

/// SGD from the warm-start model for config.epochs, with config.beta and the
/// frozen alpha weights. Seeded-shuffled sample order per epoch; deterministic
/// per (seed, config, alpha, warm_start). config.epochs == 0 returns the warm
/// start unchanged.
FactorModel train_klmat(const RatingsDataset& train, const TrainConfig& config,
                        const AlphaModel& alpha, const FactorModel& warm_start);

}  // namespace klmat
