// SPDX-License-Identifier: Apache-2.0
#include "klmat/klmat_train.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "klmat/errors.hpp"

namespace klmat {

namespace {

std::string sample_tag(const KlmatSampleContext& ctx) {
    return "sample (user " + std::to_string(ctx.user) + ", item " + std::to_string(ctx.item) + ")";
}

// (p - q)(ln p - ln q) with p = 1/x, q = 1/n, evaluated at x = alpha_i * u.v
// (or at the clamp point when x <= epsilon_guard). Both factors change sign
// together at p = q, so the product is nonnegative for all positive p, q.
double regularizer_value(const KlmatSampleContext& ctx, double scaled_dot) {
    double x = std::max(scaled_dot, ctx.epsilon_guard);
    double p = 1.0 / x;
    double q = 1.0 / static_cast<double>(ctx.num_items);
    return (p - q) * (std::log(p) - std::log(q));
}

}  // namespace

double klmat_sample_loss(const KlmatSampleContext& ctx, std::span<const double> u,
                         std::span<const double> v) {
    double nu = norm(u);
    double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) {
        throw DegenerateFactorError("zero-norm row at " + sample_tag(ctx));
    }
    double d = dot(u, v);
    double e = ctx.rating / ctx.r_max - d / (nu * nv);
    double loss = e * e;
    if (ctx.beta != 0.0) {
        loss += ctx.beta * regularizer_value(ctx, ctx.alpha_i * d);
    }
    if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at " + sample_tag(ctx));
    }
    return loss;
}

void klmat_gradients(const KlmatSampleContext& ctx, std::span<const double> u,
                     std::span<const double> v, std::span<double> grad_u,
                     std::span<double> grad_v) {
    cosine_loss_gradients(u, v, ctx.rating / ctx.r_max, grad_u, grad_v);

    if (ctx.beta != 0.0) {
        double d = dot(u, v);
        double x = ctx.alpha_i * d;
        // Inside the clamped region the regularizer is a constant, so only
        // the squared-error part contributes to the gradient.
        if (x > ctx.epsilon_guard) {
            double p = 1.0 / x;
            double q = 1.0 / static_cast<double>(ctx.num_items);
            // d/dx (p - q)(ln p - ln q) with p = 1/x:
            //   dp/dx = -1/x^2;  d/dp [...] = (ln p - ln q) + (p - q)/p
            double dreg_dx = -(std::log(p) - std::log(q) + (p - q) / p) / (x * x);
            double coef = ctx.beta * dreg_dx * ctx.alpha_i;
            for (std::size_t i = 0; i < u.size(); ++i) {
                grad_u[i] += coef * v[i];
                grad_v[i] += coef * u[i];
            }
        }
    }

    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(grad_u[i]) || !std::isfinite(grad_v[i])) {
            throw NumericError("non-finite gradient at " + sample_tag(ctx));
        }
    }
}

FactorModel train_klmat(const RatingsDataset& train, const TrainConfig& config,
                        const AlphaModel& alpha, const FactorModel& warm_start) {
    config.validate();
    if (alpha.alpha.size() != static_cast<std::size_t>(warm_start.num_users())) {
        throw ConfigError("alpha length does not match the model's user count");
    }

    FactorModel model = warm_start;
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(train.triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<double> grad_u(static_cast<std::size_t>(model.factors));
    std::vector<double> grad_v(static_cast<std::size_t>(model.factors));

    KlmatSampleContext ctx;
    ctx.num_items = train.num_items;
    ctx.beta = config.beta;
    ctx.r_max = train.r_max;
    ctx.epsilon_guard = config.epsilon_guard;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        for (std::size_t idx : order) {
            const Rating& t = train.triplets[idx];
            ctx.user = t.user;
            ctx.item = t.item;
            ctx.rating = t.value;
            ctx.alpha_i = alpha.alpha[static_cast<std::size_t>(t.user)];
            try {
                klmat_gradients(ctx, model.U.row(static_cast<std::size_t>(t.user)),
                                model.V.row(static_cast<std::size_t>(t.item)), grad_u, grad_v);
            } catch (const NumericError& err) {
                throw NumericError("epoch " + std::to_string(epoch) + ": " + err.what());
            }
            apply_sgd_update(model, t, grad_u, grad_v, config.learning_rate, config, rng);
        }
    }
    return model;
}

}  // namespace klmat
