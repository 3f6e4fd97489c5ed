// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <iosfwd>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "klmat/dataset.hpp"
#include "klmat/klmat_train.hpp"
#include "klmat/metrics.hpp"
#include "klmat/rank_alpha.hpp"

namespace klmat {

/// One beta-sweep record comparing KL-Mat against the vanilla baseline on the
/// same split.
struct ExperimentRow {
    double beta = 0.0;
    std::uint64_t seed = 0;
    double mae_vanilla = 0.0;
    double mae_klmat = 0.0;
    std::optional<double> s_vanilla;
    std::optional<double> s_klmat;
    double symkl_vanilla = 0.0;
    double symkl_klmat = 0.0;
    double wall_seconds = 0.0;
};

inline constexpr const char* kSweepCsvHeader =
    "beta,seed,mae_vanilla,mae_klmat,s_vanilla,s_klmat,symkl_vanilla,symkl_klmat,wall_seconds";

struct ExperimentConfig {
    std::string dataset_path;
    MovielensFormat format = MovielensFormat::csv_small;
    TrainConfig train;           // phase-one (vanilla) settings; beta comes per cell
    int klmat_epochs = 30;       // phase-three epochs
    double klmat_learning_rate = std::nan("");  // NaN = same as train.learning_rate
    double split_ratio = 0.9;
    int top_k = 10;
    double lambda = 0.1;
    RankMode rank_mode = RankMode::max_reference;
    MaeMode mae_mode = MaeMode::scaled_cosine;
    std::string rank_dump_path;  // optional diagnostics CSV

    void validate() const;
};

/// The shared per-seed phase of the pipeline: split, vanilla model, popularity
/// ranks, fitted alpha, and the vanilla-side metrics. Identical across betas,
/// so sweeps compute it once per seed.
struct SeedPhase {
    std::uint64_t seed = 0;
    Split split;
    FactorModel vanilla;
    PopularityRanks ranks;
    AlphaModel alpha;
    MetricsReport vanilla_metrics;
};

/// MAE, Matthew degree and symmetric KL to uniform for one model on one test
/// set. The KL readout is over the items the model actually recommends
/// (nonzero top-k count); the uniform target has that same support size.
MetricsReport evaluate_model(const FactorModel& model, const RatingsDataset& test,
                             const ObservedMask& mask, int top_k, RankMode rank_mode,
                             MaeMode mae_mode);

SeedPhase prepare_seed_phase(const ExperimentConfig& cfg, const RatingsDataset& ds,
                             std::uint64_t seed);

/// One (beta, seed) cell on a precomputed phase. wall_seconds covers the
/// KL-Mat training and evaluation done for this cell. When fair_out is given
/// it receives the trained KL-Mat model.
ExperimentRow run_cell(const ExperimentConfig& cfg, const SeedPhase& phase, double beta,
                       FactorModel* fair_out = nullptr);

/// Full pipeline for a single (beta, seed):
/// load -> split -> train_vanilla -> ranks -> fit_alpha -> train_klmat ->
/// metrics for both models on the same split.
ExperimentRow run_single(const ExperimentConfig& cfg, double beta, std::uint64_t seed);

/// Cartesian product of betas x seeds, vanilla phase trained once per seed.
/// Rows are streamed to out_csv as they complete and the file is finalized in
/// (beta, seed) sorted order. Throws IoError before any training if out_csv
/// is not writable. Empty out_csv skips file output. `progress`, when given,
/// receives one line per phase and per completed row.
std::vector<ExperimentRow> run_sweep(const ExperimentConfig& cfg, std::span<const double> betas,
                                     std::span<const std::uint64_t> seeds,
                                     const std::string& out_csv,
                                     std::ostream* progress = nullptr);

/// Serializes rows in the sweep CSV schema: 17-significant-digit reals, "nan"
/// for degenerate estimator values, LF line endings.
void write_rows_csv(std::span<const ExperimentRow> rows, const std::string& path);
std::string format_row_csv(const ExperimentRow& row);

/// Writes a self-contained gnuplot script with MAE-vs-beta and Matthew-vs-beta
/// overlays (four series). Throws SchemaError if the CSV is missing the sweep
/// columns or has no data rows.
void emit_plot_script(const std::string& csv_path, const std::string& out_path);

}  // namespace klmat
