// SPDX-License-Identifier: Apache-2.0
#include "klmat/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "klmat/errors.hpp"

namespace klmat {

namespace {

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_optional(const std::optional<double>& x) {
    return x ? format_real(*x) : "nan";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string with_seed_suffix(const std::string& path, std::uint64_t seed) {
    std::filesystem::path p(path);
    std::filesystem::path out = p.parent_path();
    out /= p.stem().string() + "-seed" + std::to_string(seed) + p.extension().string();
    return out.string();
}

}  // namespace

void ExperimentConfig::validate() const {
    train.validate();
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw ConfigError("split ratio must be in (0, 1)");
    }
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (klmat_epochs < 0) throw ConfigError("klmat_epochs must be >= 0");
    if (!std::isnan(klmat_learning_rate) && !(klmat_learning_rate > 0.0)) {
        throw ConfigError("klmat learning rate must be positive");
    }
}

MetricsReport evaluate_model(const FactorModel& model, const RatingsDataset& test,
                             const ObservedMask& mask, int top_k, RankMode rank_mode,
                             MaeMode mae_mode) {
    MetricsReport report;

    MaeResult mae_result = mae(model, test, mask, mae_mode);
    report.mae = mae_result.value;
    report.skipped_cold_start = mae_result.skipped_cold_start;

    PopularityRanks ranks = item_popularity_ranks(model, top_k);

    // Fairness readouts live on the support the model actually recommends:
    // the items with nonzero top-k count. Sentinel-ranked items are not part
    // of the output and are excluded from both the estimator and the KL term.
    std::vector<int> active_ranks;
    std::vector<std::int64_t> active_counts;
    active_ranks.reserve(static_cast<std::size_t>(ranks.num_ranked));
    active_counts.reserve(static_cast<std::size_t>(ranks.num_ranked));
    for (std::size_t j = 0; j < ranks.rank.size(); ++j) {
        if (ranks.count[j] > 0) {
            active_ranks.push_back(ranks.rank[j]);
            active_counts.push_back(ranks.count[j]);
        }
    }

    try {
        report.matthew_s = degree_of_matthew(active_ranks, rank_mode);
    } catch (const DegenerateEstimatorError&) {
        report.matthew_s = std::nullopt;
    }

    PopularityDistribution p = popularity_distribution_from_counts(active_counts);
    PopularityDistribution q = uniform_distribution(static_cast<int>(active_counts.size()));
    report.sym_kl_to_uniform = symmetric_kl(p, q);
    return report;
}

SeedPhase prepare_seed_phase(const ExperimentConfig& cfg, const RatingsDataset& ds,
                             std::uint64_t seed) {
    SeedPhase phase;
    phase.seed = seed;
    phase.split = split_dataset(ds, cfg.split_ratio, seed);

    TrainConfig vanilla_cfg = cfg.train;
    vanilla_cfg.seed = seed;
    vanilla_cfg.beta = 0.0;
    phase.vanilla = train_vanilla(phase.split.train, vanilla_cfg);

    phase.ranks = item_popularity_ranks(phase.vanilla, cfg.top_k);
    std::vector<double> targets = phase.ranks.rank_as_double();
    phase.alpha = fit_alpha(phase.vanilla.U, phase.vanilla.V, targets, cfg.lambda);

    ObservedMask mask = ObservedMask::from(phase.split.train, ds.num_users, ds.num_items);
    phase.vanilla_metrics = evaluate_model(phase.vanilla, phase.split.test, mask, cfg.top_k,
                                           cfg.rank_mode, cfg.mae_mode);

    if (!cfg.rank_dump_path.empty()) {
        dump_rank_diagnostics(with_seed_suffix(cfg.rank_dump_path, seed), phase.ranks,
                              phase.alpha, phase.vanilla.U, phase.vanilla.V);
    }
    return phase;
}

ExperimentRow run_cell(const ExperimentConfig& cfg, const SeedPhase& phase, double beta,
                       FactorModel* fair_out) {
    auto start = std::chrono::steady_clock::now();

    TrainConfig klmat_cfg = cfg.train;
    klmat_cfg.seed = phase.seed;
    klmat_cfg.beta = beta;
    klmat_cfg.epochs = cfg.klmat_epochs;
    if (!std::isnan(cfg.klmat_learning_rate)) {
        klmat_cfg.learning_rate = cfg.klmat_learning_rate;
    }

    FactorModel fair = train_klmat(phase.split.train, klmat_cfg, phase.alpha, phase.vanilla);

    ObservedMask mask = ObservedMask::from(phase.split.train, phase.split.train.num_users,
                                           phase.split.train.num_items);
    MetricsReport fair_metrics =
        evaluate_model(fair, phase.split.test, mask, cfg.top_k, cfg.rank_mode, cfg.mae_mode);
    if (fair_out) *fair_out = std::move(fair);

    ExperimentRow row;
    row.beta = beta;
    row.seed = phase.seed;
    row.mae_vanilla = phase.vanilla_metrics.mae;
    row.mae_klmat = fair_metrics.mae;
    row.s_vanilla = phase.vanilla_metrics.matthew_s;
    row.s_klmat = fair_metrics.matthew_s;
    row.symkl_vanilla = phase.vanilla_metrics.sym_kl_to_uniform;
    row.symkl_klmat = fair_metrics.sym_kl_to_uniform;
    row.wall_seconds = seconds_since(start);
    return row;
}

ExperimentRow run_single(const ExperimentConfig& cfg, double beta, std::uint64_t seed) {
    cfg.validate();
    auto start = std::chrono::steady_clock::now();
    RatingsDataset ds = load_movielens(cfg.dataset_path, cfg.format);
    SeedPhase phase = prepare_seed_phase(cfg, ds, seed);
    ExperimentRow row = run_cell(cfg, phase, beta);
    row.wall_seconds = seconds_since(start);
    return row;
}

std::string format_row_csv(const ExperimentRow& row) {
    std::ostringstream out;
    out << format_real(row.beta) << ',' << row.seed << ',' << format_real(row.mae_vanilla) << ','
        << format_real(row.mae_klmat) << ',' << format_optional(row.s_vanilla) << ','
        << format_optional(row.s_klmat) << ',' << format_real(row.symkl_vanilla) << ','
        << format_real(row.symkl_klmat) << ',' << format_real(row.wall_seconds);
    return out.str();
}

void write_rows_csv(std::span<const ExperimentRow> rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw IoError("cannot write " + path);
    out << kSweepCsvHeader << '\n';
    for (const ExperimentRow& row : rows) out << format_row_csv(row) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

std::vector<ExperimentRow> run_sweep(const ExperimentConfig& cfg, std::span<const double> betas,
                                     std::span<const std::uint64_t> seeds,
                                     const std::string& out_csv, std::ostream* progress) {
    cfg.validate();
    if (betas.empty()) throw ConfigError("sweep needs at least one beta");
    if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
    for (double b : betas) {
        if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("betas must be >= 0 and finite");
    }

    // Fail on an unwritable output before any training happens.
    std::ofstream out;
    if (!out_csv.empty()) {
        out.open(out_csv, std::ios::binary);
        if (!out) throw IoError("cannot write " + out_csv);
        out << kSweepCsvHeader << '\n';
        out.flush();
        if (!out) throw IoError("write failed for " + out_csv);
    }

    RatingsDataset ds = load_movielens(cfg.dataset_path, cfg.format);

    std::vector<std::uint64_t> sorted_seeds(seeds.begin(), seeds.end());
    std::sort(sorted_seeds.begin(), sorted_seeds.end());
    std::vector<double> sorted_betas(betas.begin(), betas.end());
    std::stable_sort(sorted_betas.begin(), sorted_betas.end());

    // The (split, vanilla model, ranks, alpha) phase is identical across
    // betas, so it is computed once per seed and reused for every cell.
    std::vector<SeedPhase> phases;
    phases.reserve(sorted_seeds.size());
    for (std::uint64_t seed : sorted_seeds) {
        auto start = std::chrono::steady_clock::now();
        phases.push_back(prepare_seed_phase(cfg, ds, seed));
        if (progress) {
            *progress << "seed " << seed << ": vanilla phase done in "
                      << format_real(seconds_since(start)) << "s (train "
                      << phases.back().split.train.size() << ", test "
                      << phases.back().split.test.size() << ")\n";
        }
    }

    // Cells run in final row order (beta-major, then seed), so rows can be
    // streamed as they complete and the file is already sorted.
    std::vector<ExperimentRow> rows;
    rows.reserve(sorted_betas.size() * phases.size());
    for (double beta : sorted_betas) {
        for (const SeedPhase& phase : phases) {
            rows.push_back(run_cell(cfg, phase, beta));
            if (out.is_open()) {
                out << format_row_csv(rows.back()) << '\n';
                out.flush();
            }
            if (progress) *progress << format_row_csv(rows.back()) << '\n';
        }
    }
    if (out.is_open() && !out) throw IoError("write failed for " + out_csv);
    return rows;
}

void emit_plot_script(const std::string& csv_path, const std::string& out_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path);

    std::string header;
    if (!std::getline(in, header)) throw SchemaError(csv_path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kSweepCsvHeader) {
        throw SchemaError(csv_path + ": header does not match the sweep schema");
    }
    std::string line;
    bool has_rows = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line != "\r") {
            has_rows = true;
            break;
        }
    }
    if (!has_rows) throw SchemaError(csv_path + ": no data rows");

    std::filesystem::path png = std::filesystem::path(out_path);
    png.replace_extension(".png");

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    out << "# KL-Mat sweep plots; render with: gnuplot " << out_path << "\n"
        << "set datafile separator \",\"\n"
        << "set datafile missing \"nan\"\n"
        << "set terminal pngcairo size 1280,520\n"
        << "set output \"" << png.string() << "\"\n"
        << "set multiplot layout 1,2\n"
        << "set key left top\n"
        << "set xlabel \"beta\"\n"
        << "set ylabel \"MAE\"\n"
        << "plot \"" << csv_path << "\" using 1:3 every ::1 with points pt 7 title \"mae_vanilla\", \\\n"
        << "     \"\" using 1:4 every ::1 with points pt 5 title \"mae_klmat\"\n"
        << "set ylabel \"degree of Matthew effect\"\n"
        << "plot \"" << csv_path << "\" using 1:5 every ::1 with points pt 7 title \"s_vanilla\", \\\n"
        << "     \"\" using 1:6 every ::1 with points pt 5 title \"s_klmat\"\n"
        << "unset multiplot\n";
    if (!out) throw IoError("write failed for " + out_path);
}

}  // namespace klmat
