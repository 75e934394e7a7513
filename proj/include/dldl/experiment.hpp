#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dldl/core.hpp"
#include "dldl/dataset.hpp"
#include "dldl/metrics.hpp"
#include "dldl/solver.hpp"

namespace dldl {

struct GridSpec {
  std::vector<double> alpha_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> beta_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> gamma_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  Metric selection_metric = Metric::Chebyshev;

  void validate() const;
  std::size_t cells() const { return alpha_grid.size() * beta_grid.size() * gamma_grid.size(); }
};

struct GridCell {
  std::size_t alpha_index = 0;
  std::size_t beta_index = 0;
  std::size_t gamma_index = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double score = 0.0;  // selection metric of the validation predictions
  bool failed = false;
  std::string error;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridResult {
  HyperParams best;
  std::size_t best_cell = 0;
  std::vector<GridCell> cells;  // alpha-major grid order
};

/// Fits every (alpha, beta, gamma) cell on train and scores predict_unseen on val.
/// Cells run on up to `threads` workers (0 picks the hardware concurrency); the
/// outcome does not depend on execution order. Ties go to the smallest index triple.
GridResult grid_search(const LdlDataset& train, const LdlDataset& val, const GridSpec& grid,
                       const HyperParams& params, unsigned threads = 0);

struct Baseline {
  std::string method;
  MetricReport recovery;
  MetricReport predictive;

  friend bool operator==(const Baseline&, const Baseline&) = default;
};

struct OuterRecord {
  ObjectiveBreakdown objective;
  OuterDiagnostics diagnostics;

  friend bool operator==(const OuterRecord&, const OuterRecord&) = default;
};

struct SolverDiagnostics {
  ObjectiveBreakdown initial_objective;
  std::vector<OuterRecord> outer;
  bool converged = false;
  std::vector<GridCell> grid;

  friend bool operator==(const SolverDiagnostics&, const SolverDiagnostics&) = default;
};

struct WallClock {
  double grid_seconds = 0.0;
  double fit_seconds = 0.0;
  double total_seconds = 0.0;

  friend bool operator==(const WallClock&, const WallClock&) = default;
};

struct ExperimentReport {
  std::string dataset;
  HyperParams hyperparameters;
  double delta = 0.01;
  MetricReport recovery;
  MetricReport predictive;
  std::vector<Baseline> baselines;
  SolverDiagnostics solver_diagnostics;
  std::optional<WallClock> wall_clock;  // only when requested; keeps reports reproducible
  std::uint64_t seed = 0;
  OneErrorVariant one_error_variant = OneErrorVariant::Top1Irrelevant;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

struct ExperimentOptions {
  OneErrorVariant one_error_variant = OneErrorVariant::Top1Irrelevant;
  bool record_timings = false;
  unsigned threads = 0;
};

/// binarize -> split -> grid search -> final fit -> recovery, predictive and baseline metrics.
ExperimentReport run_experiment(const LdlDataset& dataset, const SplitSpec& split_spec,
                                const GridSpec& grid, const HyperParams& params, double delta,
                                const ExperimentOptions& options = {});

}  // namespace dldl
