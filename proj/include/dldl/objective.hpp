#pragma once

#include "dldl/core.hpp"

namespace dldl {

/// Per-term values of the joint objective
///   KL(D, P) + alpha tr(D^T G D) + beta ||D||_F^2 + gamma ||W||_F^2.
struct ObjectiveBreakdown {
  double kl_term = 0.0;
  double laplacian_term = 0.0;
  double d_frob_term = 0.0;
  double w_frob_term = 0.0;
  double total = 0.0;

  friend bool operator==(const ObjectiveBreakdown&, const ObjectiveBreakdown&) = default;
};

/// Row-wise softmax of X W, stabilized by subtracting each row's max logit.
Matrix predict(const Matrix& X, const Matrix& W);

/// sum_ij D_ij ln(D_ij / P_ij) with 0 ln 0 = 0; tiny negative roundoff is reported as 0.
double kl_divergence(const Matrix& D, const Matrix& P);

/// T(W) = sum_i logsumexp((XW)_i) - <D, XW> + gamma ||W||_F^2.
/// Equals KL(D, predict(X, W)) + gamma ||W||_F^2 minus the entropy term sum D ln D.
double w_objective(const Matrix& W, const Matrix& X, const Matrix& D, double gamma);

/// X^T (P - D) + 2 gamma W with P = predict(X, W).
Matrix w_gradient(const Matrix& W, const Matrix& X, const Matrix& D, double gamma);

/// Weights of the D-subproblem U(D).
struct DTerms {
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 0.0;
};

/// U(D) = KL(D, P) + alpha tr(D^T G D) + beta ||D||_F^2 + <Phi, B - D> + tau/2 ||B - D||_F^2.
double d_objective(const Matrix& D, const Matrix& P, const Matrix& G, const Matrix& B,
                   const Matrix& Phi, const DTerms& terms);

/// Entrywise gradient of U. Entries with D_ij == 0 get 0; positive entries are floored
/// at 1e-12 inside the logarithm.
Matrix d_gradient(const Matrix& D, const Matrix& P, const Matrix& G, const Matrix& B,
                  const Matrix& Phi, const DTerms& terms);

struct ObjectiveWeights {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

ObjectiveBreakdown full_objective(const Matrix& D, const Matrix& W, const Matrix& X,
                                  const Matrix& G, const ObjectiveWeights& weights);

}  // namespace dldl
