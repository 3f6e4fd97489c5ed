// SPDX-License-Identifier: Apache-2.0
//
// Command line harness for the KL-Mat pipeline: single runs, beta sweeps, and
// plot-script generation from sweep CSVs.
//
// Exit codes: 0 success, 1 config error, 2 data error, 3 numeric failure.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "klmat/errors.hpp"
#include "klmat/experiment.hpp"

namespace {

klmat::MovielensFormat parse_format(const std::string& name) {
    if (name == "csv-small") return klmat::MovielensFormat::csv_small;
    if (name == "dat-1m") return klmat::MovielensFormat::dat_1m;
    throw klmat::ConfigError("unknown format '" + name + "' (expected csv-small or dat-1m)");
}

void add_pipeline_options(CLI::App* cmd, klmat::ExperimentConfig& cfg, std::string& format_name) {
    cmd->add_option("--dataset", cfg.dataset_path, "Path to the ratings file")->required();
    cmd->add_option("--format", format_name, "Dataset format: csv-small or dat-1m")
        ->check(CLI::IsMember({"csv-small", "dat-1m"}))
        ->required();
    cmd->add_option("--factors", cfg.train.factors, "Latent factor dimension k")
        ->capture_default_str();
    cmd->add_option("--lr", cfg.train.learning_rate, "SGD learning rate (both phases)")
        ->capture_default_str();
    cmd->add_option("--epochs", cfg.train.epochs, "Vanilla training epochs")
        ->capture_default_str();
    cmd->add_option("--klmat-epochs", cfg.klmat_epochs, "KL-Mat training epochs")
        ->capture_default_str();
    cmd->add_option("--klmat-lr", cfg.klmat_learning_rate,
                    "KL-Mat phase learning rate (default: same as --lr)");
    cmd->add_option("--split", cfg.split_ratio, "Train fraction of the train/test split")
        ->capture_default_str();
    cmd->add_option("--top-k", cfg.top_k, "Recommendation list length for popularity counts")
        ->capture_default_str();
    cmd->add_option("--lambda", cfg.lambda, "Non-negative Lasso penalty for the alpha fit")
        ->capture_default_str();
    std::string rank_mode = "max";
    cmd->add_option_function<std::string>(
           "--rank-mode",
           [&cfg](const std::string& mode) {
               cfg.rank_mode = mode == "min" ? klmat::RankMode::min_reference
                                             : klmat::RankMode::max_reference;
           },
           "Matthew estimator reference rank: max or min")
        ->check(CLI::IsMember({"max", "min"}))
        ->default_str("max");
    std::string mae_mode = "cosine";
    cmd->add_option_function<std::string>(
           "--mae-mode",
           [&cfg](const std::string& mode) {
               cfg.mae_mode = mode == "raw" ? klmat::MaeMode::raw_dot
                                            : klmat::MaeMode::scaled_cosine;
           },
           "MAE prediction: cosine (r_max-scaled) or raw (dot product)")
        ->check(CLI::IsMember({"cosine", "raw"}))
        ->default_str("cosine");
    cmd->add_option("--rank-dump", cfg.rank_dump_path,
                    "Write per-item (count, rank, approx_rank) diagnostics CSV");
}

void print_row(const klmat::ExperimentRow& row) {
    std::cout << klmat::kSweepCsvHeader << '\n' << klmat::format_row_csv(row) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KL-Mat: fairness-regularized matrix factorization experiments"};
    app.require_subcommand(1);

    klmat::ExperimentConfig cfg;
    std::string format_name;

    // run
    auto* run = app.add_subcommand("run", "Run one (beta, seed) pipeline cell");
    add_pipeline_options(run, cfg, format_name);
    double beta = 0.1;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string save_vanilla, save_klmat;
    run->add_option("--beta", beta, "Regularization coefficient")->capture_default_str();
    run->add_option("--seed", seed, "Seed for split, init and shuffling")->capture_default_str();
    run->add_option("--out", out_path, "Write the result row as CSV");
    run->add_option("--save-vanilla", save_vanilla, "Save the vanilla model (text format)");
    run->add_option("--save-klmat", save_klmat, "Save the KL-Mat model (text format)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Sweep betas x seeds, streaming rows to CSV");
    klmat::ExperimentConfig sweep_cfg;
    std::string sweep_format_name;
    add_pipeline_options(sweep, sweep_cfg, sweep_format_name);
    std::vector<double> betas{0.0, 0.001, 0.01, 0.1, 1.0};
    std::vector<std::uint64_t> seeds{1};
    std::string sweep_out = "klmat_sweep.csv";
    sweep->add_option("--betas", betas, "Betas to sweep")->delimiter(',')->capture_default_str();
    sweep->add_option("--seeds", seeds, "Seeds to sweep")->delimiter(',')->capture_default_str();
    sweep->add_option("--out", sweep_out, "Output CSV path")->capture_default_str();

    // plot
    auto* plot = app.add_subcommand("plot", "Emit a gnuplot script from a sweep CSV");
    std::string plot_csv, plot_out = "klmat_plot.gp";
    plot->add_option("--csv", plot_csv, "Sweep CSV path")->required();
    plot->add_option("--out", plot_out, "Output gnuplot script path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            cfg.format = parse_format(format_name);
            klmat::RatingsDataset ds = klmat::load_movielens(cfg.dataset_path, cfg.format);
            if (ds.duplicates_replaced > 0) {
                std::cerr << "warning: " << ds.duplicates_replaced
                          << " duplicate (user,item) pairs replaced by their last occurrence\n";
            }
            cfg.validate();
            klmat::SeedPhase phase = klmat::prepare_seed_phase(cfg, ds, seed);
            klmat::FactorModel fair;
            klmat::ExperimentRow row = klmat::run_cell(cfg, phase, beta, &fair);
            print_row(row);
            if (!out_path.empty()) klmat::write_rows_csv({&row, 1}, out_path);
            if (!save_vanilla.empty()) klmat::save_model(phase.vanilla, save_vanilla);
            if (!save_klmat.empty()) klmat::save_model(fair, save_klmat);
        } else if (sweep->parsed()) {
            sweep_cfg.format = parse_format(sweep_format_name);
            auto rows = klmat::run_sweep(sweep_cfg, betas, seeds, sweep_out, &std::cerr);
            std::cerr << rows.size() << " rows written to " << sweep_out << '\n';
        } else if (plot->parsed()) {
            klmat::emit_plot_script(plot_csv, plot_out);
            std::cerr << "plot script written to " << plot_out << '\n';
        }
    } catch (const klmat::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
