#include "dldl/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "dldl/graph.hpp"

namespace dldl {

void GridSpec::validate() const {
  for (const auto* g : {&alpha_grid, &beta_grid, &gamma_grid}) {
    if (g->empty()) throw Error(ErrorCode::InvalidArgument, "hyperparameter grids must be nonempty");
    for (double v : *g) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, "grid entries must be positive");
      }
    }
  }
}

namespace {

const LogicalLabelMatrix& labels_of(const LdlDataset& data) {
  if (!data.Y) throw Error(ErrorCode::PreconditionFailed, data.name + " has no logical labels");
  return *data.Y;
}

const Matrix& truth_of(const LdlDataset& data) {
  if (!data.D_true) throw Error(ErrorCode::PreconditionFailed, data.name + " has no D_true");
  return *data.D_true;
}

bool better(double candidate, double incumbent, Metric metric) {
  return higher_is_better(metric) ? candidate > incumbent : candidate < incumbent;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

GridResult grid_search(const LdlDataset& train, const LdlDataset& val, const GridSpec& grid,
                       const HyperParams& params, unsigned threads) {
  grid.validate();
  params.validate();
  const LogicalLabelMatrix& Y = labels_of(train);
  const Matrix& val_truth = truth_of(val);
  const Matrix G = build_laplacian(train.X, params);

  GridResult out;
  out.cells.resize(grid.cells());
  std::size_t idx = 0;
  for (std::size_t a = 0; a < grid.alpha_grid.size(); ++a) {
    for (std::size_t b = 0; b < grid.beta_grid.size(); ++b) {
      for (std::size_t g = 0; g < grid.gamma_grid.size(); ++g) {
        GridCell& cell = out.cells[idx++];
        cell.alpha_index = a;
        cell.beta_index = b;
        cell.gamma_index = g;
        cell.alpha = grid.alpha_grid[a];
        cell.beta = grid.beta_grid[b];
        cell.gamma = grid.gamma_grid[g];
      }
    }
  }

  const auto run_cell = [&](GridCell& cell) {
    try {
      HyperParams p = params;
      p.alpha = cell.alpha;
      p.beta = cell.beta;
      p.gamma = cell.gamma;
      const FitResult fitted = fit(train.X, Y, p, G);
      const Matrix pred = predict_unseen(fitted.W, val.X);
      cell.score = metric_value(evaluate(val_truth, pred), grid.selection_metric);
      if (!std::isfinite(cell.score)) throw Error(ErrorCode::NonFiniteEntry, "validation score");
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, out.cells.size()));
  if (workers <= 1) {
    for (auto& cell : out.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < out.cells.size(); i = next++) run_cell(out.cells[i]);
      });
    }
  }

  bool found = false;
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    const GridCell& cell = out.cells[i];
    if (cell.failed) continue;
    // Strict improvement only, so the earliest cell in grid order wins ties.
    if (!found || better(cell.score, out.cells[out.best_cell].score, grid.selection_metric)) {
      out.best_cell = i;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::AllCellsFailed, "every grid cell failed");
  out.best = params;
  out.best.alpha = out.cells[out.best_cell].alpha;
  out.best.beta = out.cells[out.best_cell].beta;
  out.best.gamma = out.cells[out.best_cell].gamma;
  return out;
}

ExperimentReport run_experiment(const LdlDataset& dataset, const SplitSpec& split_spec,
                                const GridSpec& grid, const HyperParams& params, double delta,
                                const ExperimentOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  LdlDataset labelled = dataset;
  labelled.Y = binarize(truth_of(dataset), delta);
  const Split parts = split(labelled, split_spec);

  const auto grid_start = std::chrono::steady_clock::now();
  const GridResult selected = grid_search(parts.train, parts.val, grid, params, options.threads);
  const double grid_seconds = seconds_since(grid_start);

  const auto fit_start = std::chrono::steady_clock::now();
  const FitResult fitted = fit(parts.train.X, *parts.train.Y, selected.best);
  const double fit_seconds = seconds_since(fit_start);

  const auto variant = options.one_error_variant;
  ExperimentReport report;
  report.dataset = dataset.name;
  report.hyperparameters = selected.best;
  report.delta = delta;
  report.seed = split_spec.seed;
  report.one_error_variant = variant;
  report.recovery = evaluate(*parts.train.D_true, fitted.D, variant);
  report.predictive = evaluate(*parts.test.D_true, predict_unseen(fitted.W, parts.test.X), variant);

  // Two-step comparison: uniform recovery, then the same softmax model fit to it.
  const Matrix base_d = baseline_recover(*parts.train.Y);
  const WUpdateResult base_w =
      update_w(initial_weights(parts.train.X.features(), base_d.cols()), parts.train.X.values(),
               base_d, selected.best.gamma, selected.best);
  report.baselines.push_back(
      Baseline{"baseline", evaluate(*parts.train.D_true, base_d, variant),
               evaluate(*parts.test.D_true, predict_unseen(base_w.W, parts.test.X), variant)});

  auto& diag = report.solver_diagnostics;
  diag.initial_objective = fitted.initial_objective;
  diag.converged = fitted.converged;
  for (std::size_t t = 0; t < fitted.objective_trace.size(); ++t) {
    diag.outer.push_back(OuterRecord{fitted.objective_trace[t], fitted.inner_diagnostics[t]});
  }
  diag.grid = selected.cells;

  if (options.record_timings) {
    report.wall_clock = WallClock{grid_seconds, fit_seconds, seconds_since(start)};
  }
  return report;
}

}  // namespace dldl
