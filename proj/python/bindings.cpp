// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <vector>

#include "klmat/errors.hpp"
#include "klmat/experiment.hpp"

namespace py = pybind11;
using namespace klmat;

namespace {

py::array_t<double> matrix_to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto buf = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) buf(i, j) = row[j];
    }
    return out;
}

Matrix numpy_to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ConfigError("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    auto buf = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        for (py::ssize_t j = 0; j < a.shape(1); ++j) {
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = buf(i, j);
        }
    }
    return m;
}

PopularityDistribution make_distribution(const std::vector<double>& probs) {
    PopularityDistribution d;
    d.probs = probs;
    d.validate();
    return d;
}

}  // namespace

PYBIND11_MODULE(_klmat, m) {
    m.doc() = "KL-Mat: matrix factorization with a symmetrized KL fairness regularizer";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<EmptyDatasetError>(m, "EmptyDatasetError");
    py::register_exception<IoError>(m, "IoError");
    py::register_exception<SchemaError>(m, "SchemaError");
    py::register_exception<SupportError>(m, "SupportError");
    py::register_exception<EmptyEvaluationError>(m, "EmptyEvaluationError");
    py::register_exception<DegenerateFactorError>(m, "DegenerateFactorError");
    py::register_exception<NumericError>(m, "NumericError");
    py::register_exception<DegenerateEstimatorError>(m, "DegenerateEstimatorError");

    py::enum_<MovielensFormat>(m, "MovielensFormat")
        .value("csv_small", MovielensFormat::csv_small)
        .value("dat_1m", MovielensFormat::dat_1m);
    py::enum_<MaeMode>(m, "MaeMode")
        .value("scaled_cosine", MaeMode::scaled_cosine)
        .value("raw_dot", MaeMode::raw_dot);
    py::enum_<RankMode>(m, "RankMode")
        .value("max_reference", RankMode::max_reference)
        .value("min_reference", RankMode::min_reference);

    py::class_<Rating>(m, "Rating")
        .def_readonly("user", &Rating::user)
        .def_readonly("item", &Rating::item)
        .def_readonly("value", &Rating::value)
        .def("__repr__", [](const Rating& r) {
            return "Rating(user=" + std::to_string(r.user) + ", item=" + std::to_string(r.item) +
                   ", value=" + std::to_string(r.value) + ")";
        });

    py::class_<RatingsDataset>(m, "RatingsDataset")
        .def_readonly("num_users", &RatingsDataset::num_users)
        .def_readonly("num_items", &RatingsDataset::num_items)
        .def_readonly("r_max", &RatingsDataset::r_max)
        .def_readonly("triplets", &RatingsDataset::triplets)
        .def_readonly("user_ids", &RatingsDataset::user_ids)
        .def_readonly("item_ids", &RatingsDataset::item_ids)
        .def_readonly("duplicates_replaced", &RatingsDataset::duplicates_replaced)
        .def("__len__", [](const RatingsDataset& ds) { return ds.size(); });

    py::class_<Split>(m, "Split")
        .def_readonly("train", &Split::train)
        .def_readonly("test", &Split::test)
        .def_readonly("seed", &Split::seed)
        .def_readonly("ratio", &Split::ratio);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("factors", &TrainConfig::factors)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("beta", &TrainConfig::beta)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("epsilon_guard", &TrainConfig::epsilon_guard)
        .def_readwrite("init_scale", &TrainConfig::init_scale)
        .def("validate", &TrainConfig::validate);

    py::class_<FactorModel>(m, "FactorModel")
        .def_property_readonly("U", [](const FactorModel& f) { return matrix_to_numpy(f.U); })
        .def_property_readonly("V", [](const FactorModel& f) { return matrix_to_numpy(f.V); })
        .def_readonly("factors", &FactorModel::factors)
        .def_property_readonly("num_users", &FactorModel::num_users)
        .def_property_readonly("num_items", &FactorModel::num_items)
        .def("__eq__", [](const FactorModel& a, const FactorModel& b) { return a == b; });

    py::class_<PopularityRanks>(m, "PopularityRanks")
        .def_readonly("rank", &PopularityRanks::rank)
        .def_readonly("count", &PopularityRanks::count)
        .def_readonly("num_ranked", &PopularityRanks::num_ranked);

    py::class_<AlphaModel>(m, "AlphaModel")
        .def_readonly("alpha", &AlphaModel::alpha)
        .def_readonly("target_ranks", &AlphaModel::target_ranks)
        .def_readonly("lambda_", &AlphaModel::lambda);

    py::class_<FitTrace>(m, "FitTrace")
        .def(py::init<>())
        .def_readonly("objective", &FitTrace::objective)
        .def_readonly("sweeps", &FitTrace::sweeps)
        .def_readonly("converged", &FitTrace::converged);

    py::class_<PopularityDistribution>(m, "PopularityDistribution")
        .def_readonly("probs", &PopularityDistribution::probs)
        .def("validate", &PopularityDistribution::validate);

    py::class_<ObservedMask>(m, "ObservedMask")
        .def_static("from_dataset", &ObservedMask::from, py::arg("train"), py::arg("num_users"),
                    py::arg("num_items"));

    py::class_<MaeResult>(m, "MaeResult")
        .def_readonly("value", &MaeResult::value)
        .def_readonly("skipped_cold_start", &MaeResult::skipped_cold_start);

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("mae", &MetricsReport::mae)
        .def_readonly("matthew_s", &MetricsReport::matthew_s)
        .def_readonly("sym_kl_to_uniform", &MetricsReport::sym_kl_to_uniform)
        .def_readonly("skipped_cold_start", &MetricsReport::skipped_cold_start);

    py::class_<KlmatSampleContext>(m, "KlmatSampleContext")
        .def(py::init<>())
        .def_readwrite("user", &KlmatSampleContext::user)
        .def_readwrite("item", &KlmatSampleContext::item)
        .def_readwrite("rating", &KlmatSampleContext::rating)
        .def_readwrite("alpha_i", &KlmatSampleContext::alpha_i)
        .def_readwrite("num_items", &KlmatSampleContext::num_items)
        .def_readwrite("beta", &KlmatSampleContext::beta)
        .def_readwrite("r_max", &KlmatSampleContext::r_max)
        .def_readwrite("epsilon_guard", &KlmatSampleContext::epsilon_guard);

    py::class_<ExperimentRow>(m, "ExperimentRow")
        .def_readonly("beta", &ExperimentRow::beta)
        .def_readonly("seed", &ExperimentRow::seed)
        .def_readonly("mae_vanilla", &ExperimentRow::mae_vanilla)
        .def_readonly("mae_klmat", &ExperimentRow::mae_klmat)
        .def_readonly("s_vanilla", &ExperimentRow::s_vanilla)
        .def_readonly("s_klmat", &ExperimentRow::s_klmat)
        .def_readonly("symkl_vanilla", &ExperimentRow::symkl_vanilla)
        .def_readonly("symkl_klmat", &ExperimentRow::symkl_klmat)
        .def_readonly("wall_seconds", &ExperimentRow::wall_seconds)
        .def("__repr__", [](const ExperimentRow& r) {
            return "ExperimentRow(" + format_row_csv(r) + ")";
        });

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("dataset_path", &ExperimentConfig::dataset_path)
        .def_readwrite("format", &ExperimentConfig::format)
        .def_readwrite("train", &ExperimentConfig::train)
        .def_readwrite("klmat_epochs", &ExperimentConfig::klmat_epochs)
        .def_readwrite("klmat_learning_rate", &ExperimentConfig::klmat_learning_rate)
        .def_readwrite("split_ratio", &ExperimentConfig::split_ratio)
        .def_readwrite("top_k", &ExperimentConfig::top_k)
        .def_readwrite("lambda_", &ExperimentConfig::lambda)
        .def_readwrite("rank_mode", &ExperimentConfig::rank_mode)
        .def_readwrite("mae_mode", &ExperimentConfig::mae_mode)
        .def_readwrite("rank_dump_path", &ExperimentConfig::rank_dump_path)
        .def("validate", &ExperimentConfig::validate);

    // dataset operations
    m.def("load_movielens", &load_movielens, py::arg("path"), py::arg("format"));
    m.def("split_dataset", &split_dataset, py::arg("dataset"), py::arg("ratio"), py::arg("seed"));
    m.def("dataset_from_triplets", &dataset_from_triplets, py::arg("user_ids"),
          py::arg("item_ids"), py::arg("ratings"));

    // factorization
    m.def("init_model", &init_model, py::arg("num_users"), py::arg("num_items"),
          py::arg("config"));
    m.def("model_from_arrays",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& u,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
              FactorModel model;
              model.U = numpy_to_matrix(u);
              model.V = numpy_to_matrix(v);
              if (model.U.cols() != model.V.cols()) {
                  throw ConfigError("U and V must have the same number of columns");
              }
              model.factors = static_cast<int>(model.U.cols());
              return model;
          },
          py::arg("U"), py::arg("V"));
    m.def("predict_score", &predict_score, py::arg("model"), py::arg("user"), py::arg("item"));
    m.def("predict_rating", &predict_rating, py::arg("model"), py::arg("user"), py::arg("item"),
          py::arg("r_max"));
    m.def("vanilla_loss", &vanilla_loss, py::arg("model"), py::arg("dataset"));
    m.def("train_vanilla",
          py::overload_cast<const RatingsDataset&, const TrainConfig&>(&train_vanilla),
          py::arg("train"), py::arg("config"));
    m.def("train_vanilla",
          py::overload_cast<const RatingsDataset&, const TrainConfig&, const FactorModel&>(
              &train_vanilla),
          py::arg("train"), py::arg("config"), py::arg("warm_start"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // rank approximation
    m.def("item_popularity_ranks", &item_popularity_ranks, py::arg("model"), py::arg("top_k"));
    m.def("fit_alpha",
          [](const FactorModel& model, const std::vector<double>& target_ranks, double lambda,
             FitTrace* trace) { return fit_alpha(model.U, model.V, target_ranks, lambda, trace); },
          py::arg("model"), py::arg("target_ranks"), py::arg("lambda_"),
          py::arg("trace") = nullptr);
    m.def("approx_rank",
          [](const AlphaModel& alpha, const FactorModel& model, int item) {
              return approx_rank(alpha, model.U, model.V, item);
          },
          py::arg("alpha"), py::arg("model"), py::arg("item"));

    // KL-regularized training
    m.def("klmat_sample_loss",
          [](const KlmatSampleContext& ctx, const std::vector<double>& u,
             const std::vector<double>& v) { return klmat_sample_loss(ctx, u, v); },
          py::arg("ctx"), py::arg("u"), py::arg("v"));
    m.def("klmat_gradients",
          [](const KlmatSampleContext& ctx, const std::vector<double>& u,
             const std::vector<double>& v) {
              std::vector<double> gu(u.size()), gv(v.size());
              klmat_gradients(ctx, u, v, gu, gv);
              return py::make_tuple(gu, gv);
          },
          py::arg("ctx"), py::arg("u"), py::arg("v"));
    m.def("train_klmat", &train_klmat, py::arg("train"), py::arg("config"), py::arg("alpha"),
          py::arg("warm_start"));

    // metrics
    m.def("mae", &mae, py::arg("model"), py::arg("test"), py::arg("mask"),
          py::arg("mode") = MaeMode::scaled_cosine);
    m.def("distribution", &make_distribution, py::arg("probs"));
    m.def("kl_divergence", &kl_divergence, py::arg("p"), py::arg("q"));
    m.def("symmetric_kl", &symmetric_kl, py::arg("p"), py::arg("q"));
    m.def("degree_of_matthew",
          [](const std::vector<int>& ranks, RankMode mode) {
              return degree_of_matthew(ranks, mode);
          },
          py::arg("ranks"), py::arg("mode") = RankMode::max_reference);
    m.def("popularity_distribution_from_counts",
          [](const std::vector<std::int64_t>& counts) {
              return popularity_distribution_from_counts(counts);
          },
          py::arg("counts"));
    m.def("uniform_distribution", &uniform_distribution, py::arg("bins"));

    // experiment pipeline
    m.def("evaluate_model", &evaluate_model, py::arg("model"), py::arg("test"), py::arg("mask"),
          py::arg("top_k"), py::arg("rank_mode") = RankMode::max_reference,
          py::arg("mae_mode") = MaeMode::scaled_cosine);
    m.def("run_single", &run_single, py::arg("config"), py::arg("beta"), py::arg("seed"));
    m.def("run_sweep",
          [](const ExperimentConfig& cfg, const std::vector<double>& betas,
             const std::vector<std::uint64_t>& seeds, const std::string& out_csv) {
              return run_sweep(cfg, betas, seeds, out_csv);
          },
          py::arg("config"), py::arg("betas"), py::arg("seeds"), py::arg("out_csv") = "");
    m.def("emit_plot_script", &emit_plot_script, py::arg("csv_path"), py::arg("out_path"));
    m.def("format_row_csv", &format_row_csv, py::arg("row"));
}
