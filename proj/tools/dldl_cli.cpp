// Command-line driver for the DLDL solver and its experiment protocol.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "dldl/dataset.hpp"
#include "dldl/experiment.hpp"
#include "dldl/graph.hpp"
#include "dldl/metrics.hpp"
#include "dldl/report.hpp"
#include "dldl/solver.hpp"

namespace {

using namespace dldl;

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "text";
  std::string one_error_variant = "irrelevant";
  double delta = 0.01;
};

struct ModelOptions {
  std::string config;
  std::optional<double> alpha, beta, gamma;
  std::optional<int> k, outer_iters;
  std::string sigma;

  HyperParams resolve(std::uint64_t seed) const {
    HyperParams p;
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + config + "'");
      try {
        p = hyperparams_from_json(Json::parse(in), p);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
      }
    }
    if (alpha) p.alpha = *alpha;
    if (beta) p.beta = *beta;
    if (gamma) p.gamma = *gamma;
    if (k) p.k_neighbors = *k;
    if (outer_iters) p.outer_iters = *outer_iters;
    if (!sigma.empty()) {
      if (sigma == "auto") {
        p.sigma.reset();
      } else {
        try {
          p.sigma = std::stod(sigma);
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidArgument, "--sigma expects a number or 'auto'");
        }
      }
    }
    p.seed = seed;
    p.validate();
    return p;
  }
};

void add_model_options(CLI::App* app, ModelOptions& m) {
  app->add_option("--config", m.config, "JSON file with HyperParams fields");
  app->add_option("--alpha", m.alpha, "Laplacian smoothness weight");
  app->add_option("--beta", m.beta, "||D||_F^2 weight");
  app->add_option("--gamma", m.gamma, "||W||_F^2 weight");
  app->add_option("--k", m.k, "neighbors in the similarity graph");
  app->add_option("--sigma", m.sigma, "RBF bandwidth or 'auto'");
  app->add_option("--outer-iters", m.outer_iters, "outer alternations");
}

void add_seed(CLI::App* app, CommonOptions& c) {
  app->add_option("--seed", c.seed, "random seed, echoed in the output");
}

void add_out(CLI::App* app, CommonOptions& c, bool required) {
  auto* opt = app->add_option("--out", c.out, "output path");
  if (required) opt->required();
}

void add_format(CLI::App* app, CommonOptions& c) {
  app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "csv"}));
}

void add_variant(CLI::App* app, CommonOptions& c) {
  app->add_option("--one-error-variant", c.one_error_variant, "One-error criterion")
      ->check(CLI::IsMember({"mismatch", "irrelevant"}));
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
}

// Logical labels from a csv-logical file, or by thresholding a csv-ld file.
LogicalLabelMatrix labels_for(const LdlDataset& data, double delta) {
  if (data.Y) return *data.Y;
  return binarize(*data.D_true, delta);
}

std::string split_name(const std::string& prefix, const char* part) {
  return prefix + "." + part + ".csv";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dldl: label distributions learned directly from logical labels"};
  app.require_subcommand(1);

  CommonOptions common;
  ModelOptions model;

  // synth
  SynthSpec synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a clustered csv-ld dataset");
  synth_cmd->add_option("--n", synth.n, "samples");
  synth_cmd->add_option("--m", synth.m, "features");
  synth_cmd->add_option("--c", synth.c, "labels");
  synth_cmd->add_option("--clusters", synth.n_clusters, "feature clusters");
  synth_cmd->add_option("--temperature", synth.temperature, "softmax temperature");
  synth_cmd->add_option("--sparsify", synth.sparsify_delta, "zero degrees below this value");
  add_seed(synth_cmd, common);
  add_out(synth_cmd, common, true);

  // binarize
  std::string input;
  auto* bin_cmd = app.add_subcommand("binarize", "threshold a csv-ld file into csv-logical");
  bin_cmd->add_option("--in", input, "csv-ld input")->required();
  bin_cmd->add_option("--delta", common.delta, "threshold; labels need degree > delta");
  add_seed(bin_cmd, common);
  add_out(bin_cmd, common, true);

  // split
  auto* split_cmd = app.add_subcommand("split", "seeded 60/20/20 split into PREFIX.{train,val,test}.csv");
  split_cmd->add_option("--in", input, "csv-ld or csv-logical input")->required();
  add_seed(split_cmd, common);
  add_out(split_cmd, common, true);

  // fit / recover
  auto* fit_cmd = app.add_subcommand("fit", "fit the model and write it as JSON");
  auto* recover_cmd = app.add_subcommand("recover", "fit and write the recovered distributions as csv-ld");
  for (auto* cmd : {fit_cmd, recover_cmd}) {
    cmd->add_option("--in", input, "csv-logical input, or csv-ld thresholded at --delta")->required();
    cmd->add_option("--delta", common.delta, "threshold for csv-ld input");
    add_model_options(cmd, model);
    add_seed(cmd, common);
    add_out(cmd, common, false);
  }

  // predict
  std::string model_path;
  auto* predict_cmd = app.add_subcommand("predict", "predict distributions for new samples");
  predict_cmd->add_option("--model", model_path, "model JSON written by fit")->required();
  predict_cmd->add_option("--in", input, "csv-ld or csv-logical file; label columns are ignored")->required();
  add_seed(predict_cmd, common);
  add_out(predict_cmd, common, false);

  // eval
  std::string truth_path, pred_path;
  auto* eval_cmd = app.add_subcommand("eval", "score predicted distributions against ground truth");
  eval_cmd->add_option("--truth", truth_path, "csv-ld ground truth")->required();
  eval_cmd->add_option("--pred", pred_path, "csv-ld predictions")->required();
  add_variant(eval_cmd, common);
  add_format(eval_cmd, common);
  add_seed(eval_cmd, common);
  add_out(eval_cmd, common, false);

  // grid / experiment
  GridSpec grid;
  std::string selection = "chebyshev";
  unsigned threads = 0;
  bool timings = false;
  bool use_synth = false;
  auto* grid_cmd = app.add_subcommand("grid", "hyperparameter search on the train/val split");
  auto* exp_cmd = app.add_subcommand("experiment", "full recovery and predictive protocol");
  for (auto* cmd : {grid_cmd, exp_cmd}) {
    cmd->add_option("--in", input, "csv-ld dataset");
    cmd->add_flag("--synth", use_synth, "use the synth generator (see synth options) instead of --in");
    cmd->add_option("--n", synth.n, "synth samples");
    cmd->add_option("--m", synth.m, "synth features");
    cmd->add_option("--c", synth.c, "synth labels");
    cmd->add_option("--clusters", synth.n_clusters, "synth feature clusters");
    cmd->add_option("--temperature", synth.temperature, "synth softmax temperature");
    cmd->add_option("--sparsify", synth.sparsify_delta, "synth sparsification threshold");
    cmd->add_option("--delta", common.delta, "binarization threshold");
    cmd->add_option("--alpha-grid", grid.alpha_grid, "alpha candidates");
    cmd->add_option("--beta-grid", grid.beta_grid, "beta candidates");
    cmd->add_option("--gamma-grid", grid.gamma_grid, "gamma candidates");
    cmd->add_option("--select", selection, "validation metric")
        ->check(CLI::IsMember({"chebyshev", "clark", "one_error", "intersection"}));
    cmd->add_option("--threads", threads, "grid workers (0 = hardware concurrency)");
    add_model_options(cmd, model);
    add_variant(cmd, common);
    add_format(cmd, common);
    add_seed(cmd, common);
    add_out(cmd, common, false);
  }
  exp_cmd->add_flag("--timings", timings, "include wall-clock times (breaks byte-identical reruns)");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto variant = one_error_variant_from_string(common.one_error_variant);

    if (*synth_cmd) {
      synth.seed = common.seed;
      const LdlDataset data = synth_dataset(synth);
      write_dataset(data, common.out, CsvFormat::LabelDistribution);
      std::cout << "synth n=" << synth.n << " m=" << synth.m << " c=" << synth.c
                << " seed=" << common.seed << " -> " << common.out << "\n";
    } else if (*bin_cmd) {
      LdlDataset data = load_dataset(input, CsvFormat::LabelDistribution);
      data.Y = binarize(*data.D_true, common.delta);
      write_dataset(data, common.out, CsvFormat::Logical);
      std::cout << "binarize delta=" << common.delta << " seed=" << common.seed << " -> "
                << common.out << "\n";
    } else if (*split_cmd) {
      const LdlDataset data = load_dataset(input);
      const Split parts = split(data, SplitSpec{0.6, 0.2, 0.2, common.seed});
      const auto format = data.D_true ? CsvFormat::LabelDistribution : CsvFormat::Logical;
      write_dataset(parts.train, split_name(common.out, "train"), format);
      write_dataset(parts.val, split_name(common.out, "val"), format);
      write_dataset(parts.test, split_name(common.out, "test"), format);
      std::cout << "split sizes=" << parts.train_idx.size() << "/" << parts.val_idx.size() << "/"
                << parts.test_idx.size() << " seed=" << common.seed << "\n";
    } else if (*fit_cmd || *recover_cmd) {
      const LdlDataset data = load_dataset(input);
      const LogicalLabelMatrix Y = labels_for(data, common.delta);
      const HyperParams params = model.resolve(common.seed);
      const FitResult fitted = fit(data.X, Y, params);
      if (*fit_cmd) {
        Json j;
        j["seed"] = common.seed;
        j["hyperparameters"] = to_json(params);
        j["W"] = to_json(fitted.W);
        j["D"] = to_json(fitted.D);
        Json trace = Json::array();
        for (std::size_t t = 0; t < fitted.objective_trace.size(); ++t) {
          const auto& o = fitted.objective_trace[t];
          const auto& d = fitted.inner_diagnostics[t];
          trace.push_back(Json{{"total", o.total},
                               {"admm_iterations", d.admm.iterations},
                               {"admm_residual_inf", d.admm.residual_inf},
                               {"admm_converged", d.admm.converged}});
        }
        j["objective_trace"] = std::move(trace);
        j["converged"] = fitted.converged;
        emit(common.out, j.dump(2) + "\n");
      } else {
        LdlDataset recovered{data.name, data.X, fitted.D, std::nullopt};
        emit(common.out, format_dataset(recovered, CsvFormat::LabelDistribution));
        std::cerr << "recover seed=" << common.seed << "\n";
      }
    } else if (*predict_cmd) {
      std::ifstream in(model_path);
      if (!in) throw Error(ErrorCode::IoError, "cannot open model '" + model_path + "'");
      const Json j = Json::parse(in);
      const Matrix W = matrix_from_json(j.at("W"));
      const LdlDataset data = load_dataset(input);
      LdlDataset out{data.name, data.X, predict_unseen(W, data.X), std::nullopt};
      emit(common.out, format_dataset(out, CsvFormat::LabelDistribution));
      std::cerr << "predict seed=" << common.seed << "\n";
    } else if (*eval_cmd) {
      const LdlDataset truth = load_dataset(truth_path, CsvFormat::LabelDistribution);
      const LdlDataset pred = load_dataset(pred_path, CsvFormat::LabelDistribution);
      const MetricReport r = evaluate(*truth.D_true, *pred.D_true, variant);
      if (common.format == "csv") {
        emit(common.out, format_metric_table({{pred.name, r}}));
      } else {
        emit(common.out, Json{{"seed", common.seed}, {"metrics", to_json(r)}}.dump(2) + "\n");
      }
    } else if (*grid_cmd || *exp_cmd) {
      if (use_synth == !input.empty()) {
        throw Error(ErrorCode::InvalidArgument, "give exactly one of --in or --synth");
      }
      synth.seed = common.seed;
      const LdlDataset data = use_synth ? synth_dataset(synth) : load_dataset(input, CsvFormat::LabelDistribution);
      grid.selection_metric = metric_from_string(selection);
      const HyperParams params = model.resolve(common.seed);
      const SplitSpec split_spec{0.6, 0.2, 0.2, common.seed};

      if (*grid_cmd) {
        LdlDataset labelled = data;
        labelled.Y = binarize(*data.D_true, common.delta);
        const Split parts = split(labelled, split_spec);
        const GridResult result = grid_search(parts.train, parts.val, grid, params, threads);
        if (common.format == "csv") {
          std::ostringstream os;
          os.precision(17);
          os << "alpha,beta,gamma,score,failed,selected\n";
          for (std::size_t i = 0; i < result.cells.size(); ++i) {
            const auto& c = result.cells[i];
            os << c.alpha << ',' << c.beta << ',' << c.gamma << ',' << c.score << ','
               << (c.failed ? 1 : 0) << ',' << (i == result.best_cell ? 1 : 0) << '\n';
          }
          emit(common.out, os.str());
        } else {
          Json cells = Json::array();
          for (const auto& c : result.cells) {
            cells.push_back(Json{{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma},
                                 {"score", c.score}, {"failed", c.failed}, {"error", c.error}});
          }
          emit(common.out, Json{{"seed", common.seed},
                                {"selection_metric", to_string(grid.selection_metric)},
                                {"best", to_json(result.best)},
                                {"best_cell", result.best_cell},
                                {"cells", std::move(cells)}}
                                   .dump(2) + "\n");
        }
      } else {
        ExperimentOptions options{variant, timings, threads};
        const ExperimentReport report =
            run_experiment(data, split_spec, grid, params, common.delta, options);
        const auto format = common.format == "csv" ? ReportFormat::CsvTables : ReportFormat::StructuredText;
        if (common.out.empty()) {
          if (format == ReportFormat::CsvTables) {
            throw Error(ErrorCode::InvalidArgument, "--format csv needs --out DIR");
          }
          std::cout << format_report(report);
        } else {
          write_report(report, common.out, format);
        }
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
