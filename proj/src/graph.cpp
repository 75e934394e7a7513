#include "dldl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace dldl {

SimilarityMatrix knn_similarity_directed(const FeatureMatrix& X, int k,
                                         std::optional<double> sigma) {
  const Eigen::Index n = X.samples();
  if (k <= 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (k >= n) {
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(k) + " requires 0 < k < n=" + std::to_string(n));
  }
  if (sigma && !(*sigma > 0.0)) {
    throw Error(ErrorCode::SigmaNonPositive, "sigma=" + std::to_string(*sigma));
  }
  const Matrix& x = X.values();

  Matrix sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sq(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (x.row(i) - x.row(j)).squaredNorm();
      sq(i, j) = d2;
      sq(j, i) = d2;
    }
  }

  std::vector<std::vector<Eigen::Index>> neighbors(static_cast<std::size_t>(n));
  std::vector<double> edge_lengths;
  edge_lengths.reserve(static_cast<std::size_t>(n * k));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t pos = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) order[pos++] = j;
    }
    const auto cmp = [&](Eigen::Index a, Eigen::Index b) {
      return sq(i, a) < sq(i, b) || (sq(i, a) == sq(i, b) && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), cmp);
    auto& nb = neighbors[static_cast<std::size_t>(i)];
    nb.assign(order.begin(), order.begin() + k);
    for (auto j : nb) edge_lengths.push_back(std::sqrt(sq(i, j)));
  }

  double bandwidth = 1.0;
  if (sigma) {
    bandwidth = *sigma;
  } else {
    // Median of the kNN edge lengths; the lower median for an even count.
    auto mid = edge_lengths.begin() + static_cast<std::ptrdiff_t>((edge_lengths.size() - 1) / 2);
    std::nth_element(edge_lengths.begin(), mid, edge_lengths.end());
    bandwidth = *mid > 0.0 ? *mid : 1.0;
  }

  SimilarityMatrix out{Matrix::Zero(n, n), bandwidth, false};
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (auto j : neighbors[static_cast<std::size_t>(i)]) out.values(i, j) = std::exp(-sq(i, j) * inv);
  }
  return out;
}

SimilarityMatrix knn_similarity(const FeatureMatrix& X, int k, std::optional<double> sigma) {
  SimilarityMatrix a = knn_similarity_directed(X, k, sigma);
  Matrix sym = 0.5 * (a.values + a.values.transpose());
  a.values = std::move(sym);
  a.symmetric = true;
  return a;
}

Matrix laplacian(const Matrix& A) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "A must be square");
  const double asym = A.rows() == 0 ? 0.0 : (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw Error(ErrorCode::NotSymmetric, "max asymmetry " + std::to_string(asym));
  }
  Matrix G = -A;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    G(i, i) += A.row(i).sum();
  }
  return G;
}

double smoothness(const Matrix& D, const Matrix& G) {
  if (G.rows() != G.cols() || G.cols() != D.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "G must be n x n for D n x c");
  }
  const Matrix GD = G * D;
  return D.cwiseProduct(GD).sum();
}

Matrix build_laplacian(const FeatureMatrix& X, const HyperParams& params) {
  return laplacian(knn_similarity(X, params.k_neighbors, params.sigma));
}

}  // namespace dldl
