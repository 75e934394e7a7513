#include "dldl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dldl/graph.hpp"

namespace dldl {

Vector capped_simplex_project(std::span<const double> v, std::span<const std::uint8_t> y,
                              double tol) {
  if (v.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "v and y differ in length");
  }
  const std::size_t c = v.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c; ++j) {
    if (!y[j]) continue;
    lo = std::min(lo, v[j]);
    hi = std::max(hi, v[j]);
  }
  if (!(lo <= hi)) throw Error(ErrorCode::InfeasibleCap, "y has no positive entry");

  Vector b = Vector::Zero(static_cast<Eigen::Index>(c));
  const auto fill = [&](double lambda) {
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!y[j]) continue;
      const double bj = std::clamp(v[j] - lambda, 0.0, 1.0);
      b[static_cast<Eigen::Index>(j)] = bj;
      sum += bj;
    }
    return sum;
  };

  // sum(lambda) is nonincreasing: every active b_j is 1 at lo - 1 and 0 at hi.
  lo -= 1.0;
  double sum = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    sum = fill(mid);
    if (std::abs(sum - 1.0) <= tol) break;
    if (sum > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * (1.0 + std::abs(lo) + std::abs(hi))) break;
  }

  // Push the remaining mismatch onto the interior coordinates.
  int free_count = 0;
  for (std::size_t j = 0; j < c; ++j) {
    const double bj = b[static_cast<Eigen::Index>(j)];
    if (y[j] && bj > 0.0 && bj < 1.0) ++free_count;
  }
  if (free_count > 0) {
    const double shift = (1.0 - sum) / free_count;
    for (std::size_t j = 0; j < c; ++j) {
      auto& bj = b[static_cast<Eigen::Index>(j)];
      if (y[j] && bj > 0.0 && bj < 1.0) bj = std::clamp(bj + shift, 0.0, 1.0);
    }
  }
  return b;
}

Matrix update_b(const Matrix& D, const Matrix& Phi, double tau, const LabelMatrix& Y,
                double tol) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (D.rows() != Phi.rows() || D.cols() != Phi.cols() || D.rows() != Y.rows() ||
      D.cols() != Y.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "D, Phi and Y must share a shape");
  }
  Matrix B(D.rows(), D.cols());
  Vector target(D.cols());
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    target = (D.row(i) - Phi.row(i) / tau).transpose();
    try {
      B.row(i) = capped_simplex_project({target.data(), static_cast<std::size_t>(target.size())},
                                        row_span(Y, i), tol)
                     .transpose();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InfeasibleCap) {
        throw Error(ErrorCode::InfeasibleCap, "row of Y has no positive entry",
                    static_cast<std::size_t>(i));
      }
      throw;
    }
  }
  return B;
}

namespace {

constexpr double kDFloor = 1e-12;
constexpr double kMinStep = 1e-8;

// U(D) and its gradient with the D-independent pieces (G + G^T, ln P) cached.
// Agrees with d_objective / d_gradient; tr(D^T G D) = 1/2 tr(D^T (G + G^T) D).
class DSubproblem {
 public:
  DSubproblem(const AdmmState& state, const Matrix& log_p, const Matrix& sym_g, double alpha,
              double beta)
      : state_(state), log_p_(log_p), sym_g_(sym_g), alpha_(alpha), beta_(beta) {}

  double value(const Matrix& D) const {
    double kl = 0.0;
    for (Eigen::Index k = 0; k < D.size(); ++k) {
      const double d = D.data()[k];
      if (d > 0.0) kl += d * (std::log(d) - log_p_.data()[k]);
    }
    double v = kl;
    if (alpha_ != 0.0) v += 0.5 * alpha_ * D.cwiseProduct(sym_g_ * D).sum();
    v += beta_ * D.squaredNorm();
    const Matrix diff = state_.B - D;
    v += state_.Phi.cwiseProduct(diff).sum() + 0.5 * state_.tau * diff.squaredNorm();
    return v;
  }

  void gradient(const Matrix& D, Matrix& grad) const {
    if (alpha_ != 0.0) {
      grad.noalias() = alpha_ * (sym_g_ * D);
    } else {
      grad.setZero(D.rows(), D.cols());
    }
    for (Eigen::Index k = 0; k < D.size(); ++k) {
      const double d = D.data()[k];
      double& g = grad.data()[k];
      if (d == 0.0) {
        g = 0.0;
        continue;
      }
      g += 1.0 + std::log(std::max(d, kDFloor)) - log_p_.data()[k] + 2.0 * beta_ * d -
           state_.Phi.data()[k] + state_.tau * (d - state_.B.data()[k]);
    }
  }

 private:
  const AdmmState& state_;
  const Matrix& log_p_;
  const Matrix& sym_g_;
  double alpha_;
  double beta_;
};

struct DContext {
  Matrix log_p;
  Matrix sym_g;
};

DContext make_context(const Matrix& P, const Matrix& G) {
  if (G.rows() != P.rows() || G.cols() != P.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "G must be n x n");
  }
  if (!(P.minCoeff() > 0.0)) throw Error(ErrorCode::NonPositivePrediction, "P must be positive");
  return DContext{P.array().log().matrix(), G + G.transpose()};
}

DStepResult descend(const AdmmState& state, const DContext& ctx, const LabelMatrix& Y,
                    double alpha, double beta, const HyperParams& params, double& step_hint);

void projected_step(const Matrix& D, const Matrix& grad, double step, const LabelMatrix& Y,
                    Matrix& out) {
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      out(i, j) = Y(i, j) ? std::clamp(D(i, j) - step * grad(i, j), kDFloor, 1.0) : 0.0;
    }
  }
}

// Largest gradient magnitude over entries that are free to move.
double free_gradient_norm(const Matrix& D, const Matrix& grad, const LabelMatrix& Y) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      if (!Y(i, j)) continue;
      const double g = grad(i, j);
      if (D(i, j) <= kDFloor && g > 0.0) continue;
      if (D(i, j) >= 1.0 && g < 0.0) continue;
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

}  // namespace

namespace {

DStepResult descend(const AdmmState& state, const DContext& ctx, const LabelMatrix& Y,
                    double alpha, double beta, const HyperParams& params, double& step_hint) {
  if (state.D.rows() != Y.rows() || state.D.cols() != Y.cols() ||
      state.D.rows() != ctx.log_p.rows() || state.D.cols() != ctx.log_p.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "D, P and Y must share a shape");
  }
  const DSubproblem problem(state, ctx.log_p, ctx.sym_g, alpha, beta);
  DStepResult out{state.D, 0, false};
  Matrix& D = out.D;
  Matrix trial(D.rows(), D.cols());
  Matrix grad(D.rows(), D.cols());
  double current = problem.value(D);

  for (int step = 0; step < params.d_inner_iters; ++step) {
    problem.gradient(D, grad);
    if (free_gradient_norm(D, grad, Y) <= params.d_step_tol) break;
    bool accepted = false;
    // Backtracking from twice the last accepted step (1.0 on the first call).
    for (double eta = std::min(1.0, 2.0 * step_hint); eta >= kMinStep; eta *= 0.5) {
      projected_step(D, grad, eta, Y, trial);
      const double value = problem.value(trial);
      if (value < current) {
        D.swap(trial);
        current = value;
        step_hint = eta;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.line_search_stalled = true;
      break;
    }
    ++out.steps;
  }
  return out;
}

}  // namespace

DStepResult update_d_inner(const AdmmState& state, const Matrix& P, const Matrix& G,
                           const LabelMatrix& Y, double alpha, double beta,
                           const HyperParams& params) {
  const DContext ctx = make_context(P, G);
  double step_hint = 0.5;
  return descend(state, ctx, Y, alpha, beta, params, step_hint);
}

DSolveResult solve_d(const Matrix& D0, const Matrix& P, const Matrix& G, const LabelMatrix& Y,
                     double alpha, double beta, const HyperParams& params) {
  AdmmState state;
  state.D = D0;
  state.B = Matrix::Zero(D0.rows(), D0.cols());
  state.Phi = Matrix::Zero(D0.rows(), D0.cols());
  state.tau = params.tau_init;
  state.residual_inf = (state.B - state.D).cwiseAbs().maxCoeff();

  const DContext ctx = make_context(P, G);
  double step_hint = 0.5;
  DSolveResult out;
  while (state.residual_inf > params.admm_tol && state.iteration < params.admm_max_iters) {
    DStepResult step = descend(state, ctx, Y, alpha, beta, params, step_hint);
    out.diagnostics.d_steps += step.steps;
    if (step.line_search_stalled) ++out.diagnostics.line_search_stalls;
    state.D = std::move(step.D);
    state.B = update_b(state.D, state.Phi, state.tau, Y, params.qp_tol);
    const Matrix gap = state.B - state.D;
    state.residual_inf = gap.cwiseAbs().maxCoeff();
    state.Phi += state.tau * gap;
    state.tau = std::min(params.rho * state.tau, params.tau_max);
    ++state.iteration;
  }

  out.diagnostics.iterations = state.iteration;
  out.diagnostics.residual_inf = state.residual_inf;
  out.diagnostics.final_tau = state.tau;
  out.diagnostics.converged = state.residual_inf <= params.admm_tol;
  // The loop body never ran when D0 already coincided with B = 0, which cannot
  // happen for a feasible D0; project anyway so the result is always feasible.
  out.D = state.iteration > 0 ? std::move(state.B)
                              : update_b(state.D, state.Phi, state.tau, Y, params.qp_tol);
  return out;
}

WUpdateResult update_w(const Matrix& W0, const Matrix& X, const Matrix& D, double gamma,
                       const HyperParams& params) {
  constexpr double kArmijo = 1e-4;
  WUpdateResult out{W0, 0, 0.0, false, false};
  Matrix& W = out.W;
  double current = w_objective(W, X, D, gamma);
  double step = 1.0;
  Matrix trial;
  for (; out.iterations < params.w_max_iters; ++out.iterations) {
    const Matrix grad = w_gradient(W, X, D, gamma);
    const double sq = grad.squaredNorm();
    out.grad_norm = std::sqrt(sq);
    if (out.grad_norm <= params.w_grad_tol) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (step = std::min(1.0, 2.0 * step); step >= 1e-12; step *= 0.5) {
      trial = W - step * grad;
      const double value = w_objective(trial, X, D, gamma);
      if (value <= current - kArmijo * step * sq) {
        W.swap(trial);
        current = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.line_search_stalled = true;
      break;
    }
  }
  if (!out.converged && !out.line_search_stalled) {
    out.grad_norm = w_gradient(W, X, D, gamma).norm();
    out.converged = out.grad_norm <= params.w_grad_tol;
  }
  return out;
}

Matrix initial_weights(Eigen::Index features, Eigen::Index labels) {
  return Matrix::Identity(features, labels);
}

Matrix initial_distribution(const LabelMatrix& Y) {
  Matrix D = Y.cast<double>();
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    const double total = D.row(i).sum();
    if (total <= 0.0) {
      throw Error(ErrorCode::AllZeroLabelRow, "no positive label", static_cast<std::size_t>(i));
    }
    D.row(i) /= total;
  }
  return D;
}

FitResult fit(const FeatureMatrix& X, const LogicalLabelMatrix& Y, const HyperParams& params,
              const std::optional<Matrix>& G) {
  params.validate();
  if (X.samples() != Y.samples()) {
    throw Error(ErrorCode::RowCountMismatch, "X and Y differ in row count");
  }
  if (X.samples() < 2) throw Error(ErrorCode::TooSmall, "fit needs n >= 2");
  const Matrix laplace = G ? *G : build_laplacian(X, params);
  if (laplace.rows() != X.samples() || laplace.cols() != X.samples()) {
    throw Error(ErrorCode::DimensionMismatch, "G must be n x n");
  }
  const Matrix& x = X.values();
  const LabelMatrix& y = Y.values();
  const ObjectiveWeights weights{params.alpha, params.beta, params.gamma};

  FitResult out;
  out.W = initial_weights(X.features(), Y.labels());
  out.D = initial_distribution(y);
  out.initial_objective = full_objective(out.D, out.W, x, laplace, weights);

  double previous = out.initial_objective.total;
  for (int t = 0; t < params.outer_iters; ++t) {
    OuterDiagnostics diag;
    WUpdateResult w = update_w(out.W, x, out.D, params.gamma, params);
    out.W = std::move(w.W);
    diag.w_iterations = w.iterations;
    diag.w_grad_norm = w.grad_norm;
    diag.w_line_search_stalled = w.line_search_stalled;

    const Matrix P = predict(x, out.W);
    DSolveResult d = solve_d(out.D, P, laplace, y, params.alpha, params.beta, params);
    diag.admm = d.diagnostics;

    // Keep the D-step only if it does not raise the joint objective at the new W.
    const ObjectiveBreakdown kept = full_objective(out.D, out.W, x, laplace, weights);
    const ObjectiveBreakdown moved = full_objective(d.D, out.W, x, laplace, weights);
    if (moved.total <= kept.total) {
      out.D = std::move(d.D);
      out.objective_trace.push_back(moved);
    } else {
      diag.d_step_accepted = false;
      out.objective_trace.push_back(kept);
    }
    out.inner_diagnostics.push_back(diag);

    const double current = out.objective_trace.back().total;
    const double change = std::abs(previous - current) / std::max(1.0, std::abs(previous));
    previous = current;
    if (change <= params.outer_rel_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

Matrix predict_unseen(const Matrix& W, const FeatureMatrix& X_new) {
  return predict(X_new.values(), W);
}

}  // namespace dldl
