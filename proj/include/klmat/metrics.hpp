// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "klmat/dataset.hpp"
#include "klmat/factorization.hpp"

namespace klmat {

/// Discrete probability vector over B >= 1 bins; entries nonnegative and
/// summing to 1 within 1e-9 (validated on construction).
struct PopularityDistribution {
    std::vector<double> probs;

    std::size_t bins() const noexcept { return probs.size(); }
    void validate() const;
};

enum class MaeMode {
    scaled_cosine,  // prediction = r_max * cosine, clipped to [0, r_max]
    raw_dot,        // prediction = U_i . V_j, unscaled
};

enum class RankMode {
    max_reference,  // s = 1 + n / sum(ln(rank_i / rank_max))
    min_reference,  // s = 1 + n / sum(ln(rank_i / rank_min))
};

/// Which users/items have at least one training observation. Test triplets
/// outside the mask are cold-start and excluded from evaluation.
struct ObservedMask {
    std::vector<std::uint8_t> user_seen;
    std::vector<std::uint8_t> item_seen;

    static ObservedMask from(const RatingsDataset& train, int num_users, int num_items);
};

struct MaeResult {
    double value = 0.0;
    long skipped_cold_start = 0;
};

struct MetricsReport {
    double mae = 0.0;
    std::optional<double> matthew_s;  // empty when the estimator is degenerate
    double sym_kl_to_uniform = 0.0;
    long skipped_cold_start = 0;
};

/// Mean |R_ij - prediction| over evaluable test triplets; cold-start triplets
/// are skipped and counted. Throws EmptyEvaluationError if nothing is
/// evaluable. Order-insensitive (compensated summation).
MaeResult mae(const FactorModel& model, const RatingsDataset& test, const ObservedMask& mask,
              MaeMode mode = MaeMode::scaled_cosine);

/// sum p * ln(p/q) with 0 * ln(0/q) == 0. Throws SupportError where p > 0 and
/// q == 0.
double kl_divergence(const PopularityDistribution& p, const PopularityDistribution& q);

/// kl_divergence(p, q) + kl_divergence(q, p); requires mutual absolute
/// continuity.
double symmetric_kl(const PopularityDistribution& p, const PopularityDistribution& q);

/// Power-law exponent estimate s = 1 + n / sum(ln(rank_i / rank_ref)) over the
/// given ranks (rank_ref = max or min of the list by mode). Throws
/// DegenerateEstimatorError when the log-sum is zero (all ranks equal).
///
/// With the max reference the sum of logs is nonpositive, so s <= 1 and is
/// negative for typical rank sets; comparisons read |s|, with smaller |s|
/// meaning a flatter (fairer) popularity profile. The min reference gives the
/// conventional estimator with s > 1.
double degree_of_matthew(std::span<const int> ranks, RankMode mode = RankMode::max_reference);

/// counts / sum(counts). Throws EmptyEvaluationError when all counts are zero.
PopularityDistribution popularity_distribution_from_counts(std::span<const std::int64_t> counts);

/// Uniform distribution over `bins` bins.
PopularityDistribution uniform_distribution(int bins);

}  // namespace klmat
