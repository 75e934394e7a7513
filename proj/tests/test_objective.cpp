#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dldl/graph.hpp"
#include "dldl/objective.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dldl;
using testing_support::mat;

namespace {

struct Instance {
  Matrix X, W, D, P, G, B, Phi;
  LabelMatrix Y;
};

Instance random_instance(std::mt19937_64& rng, int n, int m, int c) {
  Instance s;
  s.X = oracle::random_matrix(rng, n, m);
  s.W = oracle::random_matrix(rng, m, c);
  s.Y = oracle::random_labels(rng, n, c);
  s.D = oracle::random_distribution(rng, s.Y);
  s.P = oracle::naive_softmax(s.X, s.W);
  s.G = laplacian(oracle::random_symmetric_similarity(rng, n));
  s.B = oracle::random_distribution(rng, s.Y);
  s.Phi = oracle::random_matrix(rng, n, c);
  return s;
}

}  // namespace

TEST(Predict, ZeroWeightsGiveUniformRows) {
  const Matrix P = predict(mat({{1, 2}, {-3, 4}, {0, 0}}), Matrix::Zero(2, 4));
  EXPECT_LE((P.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(Predict, ClosedFormTwoThirds) {
  const Matrix P = predict(mat({{1, 0}}), mat({{std::log(2.0), 0}, {0, 0}}));
  EXPECT_NEAR(P(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(P(0, 1), 1.0 / 3.0, 1e-15);
}

TEST(Predict, MatchesNaiveSoftmax) {
  std::mt19937_64 rng(1);
  const Matrix X = oracle::random_matrix(rng, 4, 3);
  const Matrix W = oracle::random_matrix(rng, 3, 2);
  const Matrix P = predict(X, W);
  EXPECT_LE((P - oracle::naive_softmax(X, W)).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(P.row(i).sum(), 1.0, 1e-12);
}

TEST(Predict, StableForLargeLogits) {
  std::mt19937_64 rng(2);
  const Matrix X = oracle::random_matrix(rng, 6, 3);
  const Matrix W = oracle::random_matrix(rng, 3, 4, -1000, 1000);
  const Matrix P = predict(X, W);
  EXPECT_TRUE(P.allFinite());
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(P.row(i).sum(), 1.0, 1e-10);
}

TEST(Predict, DimensionMismatch) {
  EXPECT_DLDL_ERROR(predict(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), ErrorCode::DimensionMismatch);
}

TEST(KlDivergence, Examples) {
  const Matrix P = mat({{0.2, 0.8}, {0.5, 0.5}});
  EXPECT_EQ(kl_divergence(P, P), 0.0);
  EXPECT_NEAR(kl_divergence(mat({{1, 0}}), mat({{0.5, 0.5}})), std::log(2.0), 1e-15);
  EXPECT_NEAR(std::log(2.0), 0.693147, 1e-6);
}

TEST(KlDivergence, MatchesDirectSum) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const Instance s = random_instance(rng, 5, 3, 4);
    EXPECT_NEAR(kl_divergence(s.D, s.P), oracle::kl_sum(s.D, s.P), 1e-12);
    EXPECT_GE(kl_divergence(s.D, s.P), 0.0);
  }
}

TEST(KlDivergence, Errors) {
  EXPECT_DLDL_ERROR(kl_divergence(mat({{0.5, 0.5}}), mat({{1.0, 0.0}})),
                    ErrorCode::NonPositivePrediction);
  EXPECT_DLDL_ERROR(kl_divergence(mat({{0.5, 0.5}}), mat({{0.5, 0.25, 0.25}})),
                    ErrorCode::DimensionMismatch);
}

TEST(WObjective, UniformLogitsGiveNLogC) {
  std::mt19937_64 rng(4);
  const Matrix X = oracle::random_matrix(rng, 7, 3);
  const Matrix D = oracle::random_distribution(rng, oracle::random_labels(rng, 7, 4));
  EXPECT_NEAR(w_objective(Matrix::Zero(3, 4), X, D, 0.0), 7 * std::log(4.0), 1e-12);
  EXPECT_NEAR(w_objective(Matrix::Zero(3, 4), X, D, 5.0), 7 * std::log(4.0), 1e-12);
}

TEST(WObjective, DiffersFromKlByEntropy) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Instance s = random_instance(rng, 6, 3, 4);
    const double gamma = 0.3;
    const double lhs = w_objective(s.W, s.X, s.D, gamma) -
                       (kl_divergence(s.D, predict(s.X, s.W)) + gamma * s.W.squaredNorm());
    EXPECT_NEAR(lhs, -oracle::entropy_term(s.D), 1e-9);
  }
}

TEST(WObjective, ConvexAlongSegments) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const Instance s = random_instance(rng, 8, 3, 3);
    const Matrix W2 = oracle::random_matrix(rng, 3, 3, -3, 3);
    const double f1 = w_objective(s.W, s.X, s.D, 0.1);
    const double f2 = w_objective(W2, s.X, s.D, 0.1);
    for (double lam : {0.25, 0.5, 0.75}) {
      const Matrix mid = lam * s.W + (1 - lam) * W2;
      EXPECT_LE(w_objective(mid, s.X, s.D, 0.1), lam * f1 + (1 - lam) * f2 + 1e-9);
    }
  }
}

TEST(WGradient, StationaryWhenDMatchesPrediction) {
  std::mt19937_64 rng(7);
  const Matrix X = oracle::random_matrix(rng, 5, 3);
  const Matrix W = oracle::random_matrix(rng, 3, 2);
  EXPECT_LE(w_gradient(W, X, predict(X, W), 0.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(WGradient, ClosedFormAtZero) {
  std::mt19937_64 rng(8);
  const Matrix X = oracle::random_matrix(rng, 5, 3);
  const Matrix D = oracle::random_distribution(rng, oracle::random_labels(rng, 5, 4));
  const Matrix U = Matrix::Constant(5, 4, 0.25);
  const Matrix expected = X.transpose() * (U - D);
  EXPECT_LE((w_gradient(Matrix::Zero(3, 4), X, D, 1.0) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(WGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const Instance s = random_instance(rng, 6, 4, 3);
    const double gamma = 0.7;
    const Matrix analytic = w_gradient(s.W, s.X, s.D, gamma);
    const Matrix fd = oracle::central_difference(
        [&](const Matrix& W) { return w_objective(W, s.X, s.D, gamma); }, s.W, 1e-5);
    for (Eigen::Index i = 0; i < fd.rows(); ++i)
      for (Eigen::Index j = 0; j < fd.cols(); ++j)
        EXPECT_LE(oracle::relative_error(analytic(i, j), fd(i, j)), 1e-5);
  }
}

TEST(DObjective, Examples) {
  std::mt19937_64 rng(10);
  const Instance s = random_instance(rng, 4, 2, 3);
  const Matrix Z = Matrix::Zero(4, 3);
  EXPECT_NEAR(d_objective(s.P, s.P, s.G, s.B, Z, DTerms{0, 0, 0}), 0.0, 1e-15);

  // With B = D the multiplier and penalty terms vanish whatever Phi and tau are.
  const double base = d_objective(s.D, s.P, s.G, s.D, Z, DTerms{0.4, 0.2, 0.0});
  EXPECT_NEAR(d_objective(s.D, s.P, s.G, s.D, s.Phi, DTerms{0.4, 0.2, 3.0}), base, 1e-14);
}

TEST(DObjective, MatchesTermByTermSum) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const Instance s = random_instance(rng, 5, 2, 4);
    const DTerms terms{0.3, 0.6, 1.7};
    EXPECT_NEAR(d_objective(s.D, s.P, s.G, s.B, s.Phi, terms),
                oracle::d_objective_sum(s.D, s.P, s.G, s.B, s.Phi, 0.3, 0.6, 1.7), 1e-10);
  }
}

TEST(DGradient, PinnedEntriesHaveZeroGradient) {
  std::mt19937_64 rng(12);
  const Instance s = random_instance(rng, 5, 2, 4);
  const Matrix g = d_gradient(s.D, s.P, s.G, s.B, s.Phi, DTerms{0.5, 0.5, 0.5});
  for (Eigen::Index i = 0; i < s.D.rows(); ++i)
    for (Eigen::Index j = 0; j < s.D.cols(); ++j)
      if (s.D(i, j) == 0.0) EXPECT_EQ(g(i, j), 0.0);
}

TEST(DGradient, OneWhereDEqualsP) {
  std::mt19937_64 rng(13);
  const Instance s = random_instance(rng, 4, 2, 3);
  const Matrix Z = Matrix::Zero(4, 3);
  const Matrix g = d_gradient(s.P, s.P, s.G, s.B, Z, DTerms{0, 0, 0});
  EXPECT_LE((g.array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(DGradient, MatchesFiniteDifferencesOnInteriorEntries) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const Instance s = random_instance(rng, 6, 2, 4);
    const DTerms terms{0.8, 0.4, 2.5};
    const Matrix analytic = d_gradient(s.D, s.P, s.G, s.B, s.Phi, terms);
    const Matrix fd = oracle::central_difference(
        [&](const Matrix& D) { return oracle::d_objective_sum(D, s.P, s.G, s.B, s.Phi, 0.8, 0.4, 2.5); },
        s.D, 1e-6);
    for (Eigen::Index i = 0; i < fd.rows(); ++i)
      for (Eigen::Index j = 0; j < fd.cols(); ++j)
        if (s.D(i, j) >= 1e-3) EXPECT_LE(oracle::relative_error(analytic(i, j), fd(i, j)), 1e-4);
  }
}

TEST(DGradient, RejectsNegativeEntries) {
  Matrix D = mat({{0.5, 0.5}, {1.0, 0.0}});
  D(1, 1) = -1e-3;
  const Matrix P = Matrix::Constant(2, 2, 0.5);
  EXPECT_DLDL_ERROR(d_gradient(D, P, Matrix::Zero(2, 2), P, Matrix::Zero(2, 2), DTerms{}),
                    ErrorCode::NegativeD);
}

TEST(FullObjective, Examples) {
  std::mt19937_64 rng(15);
  const Matrix X = oracle::random_matrix(rng, 6, 3);
  const Matrix G = laplacian(oracle::random_symmetric_similarity(rng, 6));
  const Matrix U = Matrix::Constant(6, 4, 0.25);
  EXPECT_NEAR(full_objective(U, Matrix::Zero(3, 4), X, G, {0, 0, 0}).total, 0.0, 1e-15);
  EXPECT_NEAR(full_objective(U, Matrix::Zero(3, 4), X, G, {0, 1, 0}).total, 6.0 / 4.0, 1e-14);
}

TEST(FullObjective, TotalIsWeightedSumOfIndependentTerms) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 10; ++t) {
    const Instance s = random_instance(rng, 7, 3, 3);
    const ObjectiveWeights w{0.3, 0.2, 0.1};
    const ObjectiveBreakdown b = full_objective(s.D, s.W, s.X, s.G, w);
    const double kl = oracle::kl_sum(s.D, oracle::naive_softmax(s.X, s.W));
    const double lap = (s.D.transpose() * s.G * s.D).trace();
    EXPECT_NEAR(b.kl_term, kl, 1e-12);
    EXPECT_NEAR(b.laplacian_term, lap, 1e-12);
    EXPECT_NEAR(b.d_frob_term, s.D.squaredNorm(), 1e-12);
    EXPECT_NEAR(b.w_frob_term, s.W.squaredNorm(), 1e-12);
    EXPECT_NEAR(b.total, kl + 0.3 * lap + 0.2 * s.D.squaredNorm() + 0.1 * s.W.squaredNorm(), 1e-9);
    EXPECT_NEAR(b.total,
                b.w_frob_term * 0.1 + b.d_frob_term * 0.2 + b.laplacian_term * 0.3 + b.kl_term, 1e-12);
  }
}
