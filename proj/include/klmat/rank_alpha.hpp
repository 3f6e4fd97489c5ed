// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "klmat/factorization.hpp"
#include "klmat/matrix.hpp"

namespace klmat {

/// Item popularity derived from per-user top-k recommendation lists.
///
/// rank[j] == 1 marks the most frequently recommended item. Items that never
/// appear in any list share the sentinel rank num_ranked + 1 so every item
/// still carries a target value for the alpha fit.
struct PopularityRanks {
    std::vector<int> rank;            // length n
    std::vector<std::int64_t> count;  // top-k appearance count per item
    int num_ranked = 0;               // items with nonzero count

    std::vector<double> rank_as_double() const {
        return std::vector<double>(rank.begin(), rank.end());
    }
};

/// Non-negative per-user weights fitted so that
///   rank_j ~ sum_i alpha[i] * (U_i . V_j).
struct AlphaModel {
    std::vector<double> alpha;         // length m, all entries >= 0
    std::vector<double> target_ranks;  // length n
    double lambda = 0.0;
};

/// Per-sweep diagnostics from fit_alpha; pass to observe convergence.
struct FitTrace {
    std::vector<double> objective;  // after each full sweep
    int sweeps = 0;
    bool converged = false;
};

/// Counts each item's appearances across all users' top_k lists (ties in
/// score broken by ascending item index) and ranks items by descending count
/// (count ties also broken by ascending item index).
PopularityRanks item_popularity_ranks(const FactorModel& model, int top_k);

/// Rank assignment from appearance counts alone; exposed for testability.
PopularityRanks ranks_from_counts(std::span<const std::int64_t> counts);

/// n x m design matrix with D(j, i) = U_i . V_j (raw dot products).
Matrix rank_design_matrix(const Matrix& U, const Matrix& V);

/// Solves min_{alpha >= 0} ||D alpha - target||^2 + lambda * sum(alpha) by
/// cyclic coordinate descent with the soft-threshold update clamped at zero.
/// Converged when the largest coordinate change in a sweep is < 1e-8, with a
/// hard cap of 10000 sweeps.
AlphaModel fit_alpha(const Matrix& U, const Matrix& V, std::span<const double> target_ranks,
                     double lambda, FitTrace* trace = nullptr);

/// ||D alpha - target||^2 + lambda * sum(alpha) for the same design as
/// fit_alpha.
double alpha_objective(const Matrix& U, const Matrix& V, std::span<const double> alpha,
                       std::span<const double> target_ranks, double lambda);

/// sum_i alpha[i] * (U_i . V_j).
double approx_rank(const AlphaModel& alpha_model, const Matrix& U, const Matrix& V, int item);

/// Diagnostic CSV: item,count,rank,approx_rank (one row per item).
void dump_rank_diagnostics(const std::string& path, const PopularityRanks& ranks,
                           const AlphaModel& alpha_model, const Matrix& U, const Matrix& V);

}  // namespace klmat
