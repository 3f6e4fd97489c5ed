// SPDX-License-Identifier: Apache-2.0
#include "klmat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "klmat/errors.hpp"
#include "klmat/matrix.hpp"

namespace klmat {

void PopularityDistribution::validate() const {
    if (probs.empty()) throw ConfigError("distribution needs at least one bin");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ConfigError("distribution entries must be nonnegative and finite");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("distribution sums to " + std::to_string(sum) + ", expected 1");
    }
}

ObservedMask ObservedMask::from(const RatingsDataset& train, int num_users, int num_items) {
    ObservedMask mask;
    mask.user_seen.assign(static_cast<std::size_t>(num_users), 0);
    mask.item_seen.assign(static_cast<std::size_t>(num_items), 0);
    for (const Rating& t : train.triplets) {
        mask.user_seen[static_cast<std::size_t>(t.user)] = 1;
        mask.item_seen[static_cast<std::size_t>(t.item)] = 1;
    }
    return mask;
}

MaeResult mae(const FactorModel& model, const RatingsDataset& test, const ObservedMask& mask,
              MaeMode mode) {
    CompensatedSum sum;
    long evaluated = 0;
    long skipped = 0;
    for (const Rating& t : test.triplets) {
        if (!mask.user_seen[static_cast<std::size_t>(t.user)] ||
            !mask.item_seen[static_cast<std::size_t>(t.item)]) {
            ++skipped;
            continue;
        }
        double prediction = mode == MaeMode::scaled_cosine
                                ? predict_rating(model, t.user, t.item, test.r_max)
                                : dot(model.U.row(static_cast<std::size_t>(t.user)),
                                      model.V.row(static_cast<std::size_t>(t.item)));
        sum.add(std::abs(t.value - prediction));
        ++evaluated;
    }
    if (evaluated == 0) {
        throw EmptyEvaluationError("no evaluable test triplets (" + std::to_string(skipped) +
                                   " cold-start skips)");
    }
    return MaeResult{sum.value() / static_cast<double>(evaluated), skipped};
}

double kl_divergence(const PopularityDistribution& p, const PopularityDistribution& q) {
    if (p.bins() != q.bins()) throw ConfigError("distributions have different bin counts");
    CompensatedSum sum;
    for (std::size_t i = 0; i < p.bins(); ++i) {
        if (p.probs[i] == 0.0) continue;  // 0 * ln(0/q) == 0
        if (q.probs[i] == 0.0) {
            throw SupportError("p has mass at bin " + std::to_string(i) + " where q is zero");
        }
        sum.add(p.probs[i] * std::log(p.probs[i] / q.probs[i]));
    }
    return sum.value();
}

double symmetric_kl(const PopularityDistribution& p, const PopularityDistribution& q) {
    return kl_divergence(p, q) + kl_divergence(q, p);
}

double degree_of_matthew(std::span<const int> ranks, RankMode mode) {
    if (ranks.empty()) throw ConfigError("degree_of_matthew needs at least one rank");
    int reference = ranks[0];
    for (int r : ranks) {
        if (r < 1) throw ConfigError("ranks must be >= 1");
        reference = mode == RankMode::max_reference ? std::max(reference, r)
                                                    : std::min(reference, r);
    }
    CompensatedSum log_sum;
    for (int r : ranks) {
        log_sum.add(std::log(static_cast<double>(r) / static_cast<double>(reference)));
    }
    if (log_sum.value() == 0.0) {
        throw DegenerateEstimatorError("all ranks equal; exponent estimator undefined");
    }
    return 1.0 + static_cast<double>(ranks.size()) / log_sum.value();
}

PopularityDistribution popularity_distribution_from_counts(std::span<const std::int64_t> counts) {
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw ConfigError("counts must be nonnegative");
        total += c;
    }
    if (total == 0) throw EmptyEvaluationError("all counts are zero");
    PopularityDistribution dist;
    dist.probs.reserve(counts.size());
    for (std::int64_t c : counts) {
        dist.probs.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return dist;
}

PopularityDistribution uniform_distribution(int bins) {
    if (bins < 1) throw ConfigError("uniform distribution needs at least one bin");
    PopularityDistribution dist;
    dist.probs.assign(static_cast<std::size_t>(bins), 1.0 / static_cast<double>(bins));
    return dist;
}

}  // namespace klmat
