#include "dldl/objective.hpp"

#include <cmath>

namespace dldl {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, what);
}

void require_d_shapes(const Matrix& D, const Matrix& P, const Matrix& G, const Matrix& B,
                      const Matrix& Phi) {
  require_same_shape(D, P, "D and P differ in shape");
  require_same_shape(D, B, "D and B differ in shape");
  require_same_shape(D, Phi, "D and Phi differ in shape");
  if (G.rows() != D.rows() || G.cols() != D.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "G must be n x n");
  }
}

constexpr double kLogFloor = 1e-12;

// Logits of one row folded into its log-sum-exp.
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  const double mx = z.maxCoeff();
  return mx + std::log((z.array() - mx).exp().sum());
}

}  // namespace

Matrix predict(const Matrix& X, const Matrix& W) {
  if (X.cols() != W.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "X has " + std::to_string(X.cols()) +
                                                  " columns, W has " + std::to_string(W.rows()) +
                                                  " rows");
  }
  Matrix P = X * W;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    auto row = P.row(i);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return P;
}

double kl_divergence(const Matrix& D, const Matrix& P) {
  require_same_shape(D, P, "D and P differ in shape");
  double total = 0.0;
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      const double p = P(i, j);
      if (!(p > 0.0)) {
        throw Error(ErrorCode::NonPositivePrediction,
                    "P(" + std::to_string(i) + "," + std::to_string(j) + ")",
                    static_cast<std::size_t>(i));
      }
      const double d = D(i, j);
      if (d > 0.0) total += d * std::log(d / p);
    }
  }
  return total < 0.0 && total >= -1e-12 ? 0.0 : total;
}

double w_objective(const Matrix& W, const Matrix& X, const Matrix& D, double gamma) {
  if (X.cols() != W.rows() || D.rows() != X.rows() || D.cols() != W.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "W objective shapes do not conform");
  }
  const Matrix logits = X * W;
  double value = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) value += log_sum_exp(logits.row(i));
  value -= D.cwiseProduct(logits).sum();
  value += gamma * W.squaredNorm();
  return value;
}

Matrix w_gradient(const Matrix& W, const Matrix& X, const Matrix& D, double gamma) {
  if (X.cols() != W.rows() || D.rows() != X.rows() || D.cols() != W.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "W gradient shapes do not conform");
  }
  const Matrix P = predict(X, W);
  Matrix grad = X.transpose() * (P - D);
  grad += 2.0 * gamma * W;
  return grad;
}

double d_objective(const Matrix& D, const Matrix& P, const Matrix& G, const Matrix& B,
                   const Matrix& Phi, const DTerms& terms) {
  require_d_shapes(D, P, G, B, Phi);
  double value = kl_divergence(D, P);
  if (terms.alpha != 0.0) value += terms.alpha * D.cwiseProduct(G * D).sum();
  value += terms.beta * D.squaredNorm();
  const Matrix diff = B - D;
  value += Phi.cwiseProduct(diff).sum();
  value += 0.5 * terms.tau * diff.squaredNorm();
  return value;
}

Matrix d_gradient(const Matrix& D, const Matrix& P, const Matrix& G, const Matrix& B,
                  const Matrix& Phi, const DTerms& terms) {
  require_d_shapes(D, P, G, B, Phi);
  Matrix smooth;
  if (terms.alpha != 0.0) smooth = terms.alpha * ((G + G.transpose()) * D);
  Matrix grad(D.rows(), D.cols());
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      const double d = D(i, j);
      if (d < 0.0) {
        throw Error(ErrorCode::NegativeD,
                    "D(" + std::to_string(i) + "," + std::to_string(j) + ")",
                    static_cast<std::size_t>(i));
      }
      if (d == 0.0) {
        grad(i, j) = 0.0;
        continue;
      }
      double g = 1.0 + std::log(std::max(d, kLogFloor)) - std::log(P(i, j));
      if (terms.alpha != 0.0) g += smooth(i, j);
      g += 2.0 * terms.beta * d - Phi(i, j) + terms.tau * (d - B(i, j));
      grad(i, j) = g;
    }
  }
  return grad;
}

ObjectiveBreakdown full_objective(const Matrix& D, const Matrix& W, const Matrix& X,
                                  const Matrix& G, const ObjectiveWeights& weights) {
  if (G.rows() != D.rows() || G.cols() != D.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "G must be n x n");
  }
  const Matrix P = predict(X, W);
  ObjectiveBreakdown out;
  out.kl_term = kl_divergence(D, P);
  out.laplacian_term = D.cwiseProduct(G * D).sum();
  out.d_frob_term = D.squaredNorm();
  out.w_frob_term = W.squaredNorm();
  out.total = out.kl_term + weights.alpha * out.laplacian_term + weights.beta * out.d_frob_term +
              weights.gamma * out.w_frob_term;
  return out;
}

}  // namespace dldl
