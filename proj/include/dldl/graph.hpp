#pragma once

#include <optional>

#include "dldl/core.hpp"

namespace dldl {

/// RBF similarities restricted to k-nearest-neighbor edges.
struct SimilarityMatrix {
  Matrix values;       // n x n, entries in [0,1], zero diagonal
  double sigma = 1.0;  // bandwidth actually used
  bool symmetric = false;
};

/// Directed kNN similarity: row i holds exp(-|x_i - x_j|^2 / (2 sigma^2)) for the
/// k nearest j != i (ties by lower index) and 0 elsewhere. An empty sigma selects
/// the median kNN-edge distance, or 1 if that median is 0.
SimilarityMatrix knn_similarity_directed(const FeatureMatrix& X, int k,
                                         std::optional<double> sigma);

/// knn_similarity_directed followed by A <- (A + A^T) / 2.
SimilarityMatrix knn_similarity(const FeatureMatrix& X, int k, std::optional<double> sigma);

/// G = diag(rowsums(A)) - A. A must be symmetric to 1e-10.
Matrix laplacian(const Matrix& A);
inline Matrix laplacian(const SimilarityMatrix& A) { return laplacian(A.values); }

/// tr(D^T G D). For G built from a symmetric A this is 1/2 sum_ij A_ij |d_i - d_j|^2.
double smoothness(const Matrix& D, const Matrix& G);

/// Builds the Laplacian used by the solver from the graph fields of params.
Matrix build_laplacian(const FeatureMatrix& X, const HyperParams& params);

}  // namespace dldl
