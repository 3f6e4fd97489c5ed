// SPDX-License-Identifier: Apache-2.0
#include "klmat/rank_alpha.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <vector>

#include "klmat/errors.hpp"

namespace klmat {

PopularityRanks ranks_from_counts(std::span<const std::int64_t> counts) {
    PopularityRanks out;
    out.count.assign(counts.begin(), counts.end());
    out.rank.assign(counts.size(), 0);

    std::vector<int> items;
    items.reserve(counts.size());
    for (int j = 0; j < static_cast<int>(counts.size()); ++j) {
        if (counts[j] > 0) items.push_back(j);
    }
    out.num_ranked = static_cast<int>(items.size());

    // Descending count, count ties broken by ascending item index.
    std::sort(items.begin(), items.end(), [&counts](int a, int b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        return a < b;
    });
    for (int r = 0; r < out.num_ranked; ++r) out.rank[items[r]] = r + 1;

    int sentinel = out.num_ranked + 1;
    for (int j = 0; j < static_cast<int>(counts.size()); ++j) {
        if (counts[j] == 0) out.rank[j] = sentinel;
    }
    return out;
}

PopularityRanks item_popularity_ranks(const FactorModel& model, int top_k) {
    int n = model.num_items();
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (top_k > n) {
        throw ConfigError("top_k (" + std::to_string(top_k) + ") exceeds item count (" +
                          std::to_string(n) + ")");
    }

    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<double, int>> scored(static_cast<std::size_t>(n));
    for (int i = 0; i < model.num_users(); ++i) {
        for (int j = 0; j < n; ++j) scored[j] = {predict_score(model, i, j), j};
        // Highest score first; score ties broken by ascending item index.
        std::partial_sort(scored.begin(), scored.begin() + top_k, scored.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
        for (int r = 0; r < top_k; ++r) ++counts[scored[r].second];
    }
    return ranks_from_counts(counts);
}

Matrix rank_design_matrix(const Matrix& U, const Matrix& V) {
    Matrix design(V.rows(), U.rows());
    for (std::size_t j = 0; j < V.rows(); ++j) {
        auto row = design.row(j);
        for (std::size_t i = 0; i < U.rows(); ++i) {
            double d = dot(U.row(i), V.row(j));
            if (!std::isfinite(d)) {
                throw NumericError("non-finite design entry at item " + std::to_string(j) +
                                   ", user " + std::to_string(i));
            }
            row[i] = d;
        }
    }
    return design;
}

AlphaModel fit_alpha(const Matrix& U, const Matrix& V, std::span<const double> target_ranks,
                     double lambda, FitTrace* trace) {
    if (lambda < 0.0 || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (target_ranks.size() != V.rows()) {
        throw ConfigError("target_ranks length does not match item count");
    }

    const std::size_t m = U.rows();
    const std::size_t n = V.rows();

    // Design laid out column-major: columns.row(i) is the design column for
    // user i (D(j,i) = U_i . V_j over items j).
    Matrix columns(m, n);
    std::vector<double> col_sq(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        auto col = columns.row(i);
        auto ui = U.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            double d = dot(ui, V.row(j));
            if (!std::isfinite(d)) {
                throw NumericError("non-finite design entry at item " + std::to_string(j) +
                                   ", user " + std::to_string(i));
            }
            col[j] = d;
            col_sq[i] += d * d;
        }
    }

    AlphaModel out;
    out.alpha.assign(m, 0.0);
    out.target_ranks.assign(target_ranks.begin(), target_ranks.end());
    out.lambda = lambda;

    // residual = target - D * alpha, maintained incrementally.
    std::vector<double> residual(target_ranks.begin(), target_ranks.end());

    constexpr double kTolerance = 1e-8;
    constexpr int kMaxSweeps = 10000;
    bool converged = false;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (col_sq[i] == 0.0) continue;
            auto col = columns.row(i);
            double old = out.alpha[i];
            // rho = d_i . (residual + d_i * old): the correlation with the
            // residual that excludes coordinate i's own contribution.
            double rho = dot(col, residual) + col_sq[i] * old;
            double candidate = (rho - lambda / 2.0) / col_sq[i];
            double next = std::max(0.0, candidate);
            double change = next - old;
            if (change != 0.0) {
                scaled_add(residual, -change, col);
                out.alpha[i] = next;
            }
            max_change = std::max(max_change, std::abs(change));
        }
        if (trace) {
            trace->objective.push_back(
                alpha_objective(U, V, out.alpha, target_ranks, lambda));
        }
        if (max_change < kTolerance) {
            converged = true;
            ++sweep;
            break;
        }
    }
    if (trace) {
        trace->sweeps = sweep;
        trace->converged = converged;
    }
    return out;
}

double alpha_objective(const Matrix& U, const Matrix& V, std::span<const double> alpha,
                       std::span<const double> target_ranks, double lambda) {
    double objective = 0.0;
    for (std::size_t j = 0; j < V.rows(); ++j) {
        double fitted = 0.0;
        for (std::size_t i = 0; i < U.rows(); ++i) {
            fitted += alpha[i] * dot(U.row(i), V.row(j));
        }
        double r = fitted - target_ranks[j];
        objective += r * r;
    }
    for (double a : alpha) objective += lambda * a;
    return objective;
}

double approx_rank(const AlphaModel& alpha_model, const Matrix& U, const Matrix& V, int item) {
    auto vj = V.row(static_cast<std::size_t>(item));
    double sum = 0.0;
    for (std::size_t i = 0; i < U.rows(); ++i) {
        sum += alpha_model.alpha[i] * dot(U.row(i), vj);
    }
    return sum;
}

void dump_rank_diagnostics(const std::string& path, const PopularityRanks& ranks,
                           const AlphaModel& alpha_model, const Matrix& U, const Matrix& V) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "item,count,rank,approx_rank\n";
    char buf[32];
    for (std::size_t j = 0; j < ranks.rank.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g",
                      approx_rank(alpha_model, U, V, static_cast<int>(j)));
        out << j << ',' << ranks.count[j] << ',' << ranks.rank[j] << ',' << buf << '\n';
    }
}

}  // namespace klmat
