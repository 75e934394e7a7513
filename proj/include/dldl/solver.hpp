#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dldl/core.hpp"
#include "dldl/objective.hpp"

namespace dldl {

/// Euclidean projection of v onto {b : 0 <= b_j <= y_j, sum_j b_j = 1}.
///
/// Bisection on the shift lambda in b_j = clamp(v_j - lambda, 0, 1) over the
/// coordinates with y_j = 1 until |sum b - 1| <= tol, followed by an exact
/// correction of the strictly interior coordinates. Coordinates with y_j = 0
/// are exactly 0. Throws InfeasibleCap when y has no positive entry.
Vector capped_simplex_project(std::span<const double> v, std::span<const std::uint8_t> y,
                              double tol = 1e-9);

/// B-step: row i is the projection of d_i - phi_i / tau onto row i's capped simplex.
Matrix update_b(const Matrix& D, const Matrix& Phi, double tau, const LabelMatrix& Y,
                double tol = 1e-9);

/// Iterate of the augmented-Lagrangian loop for the D-subproblem.
struct AdmmState {
  Matrix D;
  Matrix B;
  Matrix Phi;
  double tau = 0.0;
  int iteration = 0;
  double residual_inf = 0.0;  // ||B - D||_inf
};

struct DStepResult {
  Matrix D;
  int steps = 0;
  bool line_search_stalled = false;
};

/// Projected gradient descent on U(D) from state.D with backtracking on the step.
/// Positive-label entries stay in [1e-12, 1]; zero-label entries stay exactly 0.
/// Never increases U.
DStepResult update_d_inner(const AdmmState& state, const Matrix& P, const Matrix& G,
                           const LabelMatrix& Y, double alpha, double beta,
                           const HyperParams& params);

struct AdmmDiagnostics {
  int iterations = 0;
  double residual_inf = 0.0;  // ||B - D||_inf at exit, before D <- B
  double final_tau = 0.0;
  bool converged = false;     // false means the iteration cap was hit
  int d_steps = 0;
  int line_search_stalls = 0;

  friend bool operator==(const AdmmDiagnostics&, const AdmmDiagnostics&) = default;
};

struct DSolveResult {
  Matrix D;  // final B, feasible by construction
  AdmmDiagnostics diagnostics;
};

/// Augmented-Lagrangian loop over (D, B, Phi, tau) started from B = Phi = 0.
/// Stops once ||B - D||_inf <= admm_tol or after admm_max_iters rounds and
/// returns D = B.
DSolveResult solve_d(const Matrix& D0, const Matrix& P, const Matrix& G, const LabelMatrix& Y,
                     double alpha, double beta, const HyperParams& params);

struct WUpdateResult {
  Matrix W;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool line_search_stalled = false;
};

/// Armijo gradient descent on T(W); never increases T.
WUpdateResult update_w(const Matrix& W0, const Matrix& X, const Matrix& D, double gamma,
                       const HyperParams& params);

struct OuterDiagnostics {
  AdmmDiagnostics admm;
  int w_iterations = 0;
  double w_grad_norm = 0.0;
  bool w_line_search_stalled = false;
  bool d_step_accepted = true;  // false if the D-step would have raised the objective

  friend bool operator==(const OuterDiagnostics&, const OuterDiagnostics&) = default;
};

struct FitResult {
  Matrix D;  // recovered label distributions
  Matrix W;
  ObjectiveBreakdown initial_objective;
  std::vector<ObjectiveBreakdown> objective_trace;  // one entry per outer iteration
  std::vector<OuterDiagnostics> inner_diagnostics;
  bool converged = false;
};

/// Rectangular identity used as the initial weight matrix.
Matrix initial_weights(Eigen::Index features, Eigen::Index labels);

/// Row-normalized logical labels.
Matrix initial_distribution(const LabelMatrix& Y);

/// Alternates W- and D-updates from the initial point. G is built from X and the
/// graph fields of params when not given.
FitResult fit(const FeatureMatrix& X, const LogicalLabelMatrix& Y, const HyperParams& params,
              const std::optional<Matrix>& G = std::nullopt);

/// Label distributions for unseen samples.
Matrix predict_unseen(const Matrix& W, const FeatureMatrix& X_new);

}  // namespace dldl
