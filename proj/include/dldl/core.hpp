#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dldl {

// Dense row-major storage is used at every module boundary.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using LabelMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-sum tolerance for distributions read from user data.
inline constexpr double kUserRowSumTol = 1e-6;
/// Row-sum tolerance for distributions produced by the solver.
inline constexpr double kSolverRowSumTol = 1e-9;

enum class ErrorCode {
  RowCountMismatch,
  AllZeroLabelRow,
  NonFiniteEntry,
  NonBinaryLabel,
  LengthMismatch,
  DimensionMismatch,
  TooSmall,
  KTooLarge,
  SigmaNonPositive,
  NotSymmetric,
  NonPositivePrediction,
  NegativeD,
  InfeasibleCap,
  InvalidArgument,
  ParseError,
  RowSumViolation,
  HeaderMismatch,
  TooFewSamples,
  DegenerateRow,
  EmptyInput,
  IoError,
  PreconditionFailed,
  AllCellsFailed,
};

const char* to_string(ErrorCode code);

/// Exception type thrown by every module. `index()` carries the offending row,
/// line or grid cell when the error is about one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

/// n x m sample features; n >= 1, m >= 1, all entries finite. Training needs n >= 2,
/// which validate_dataset and fit enforce; single rows are allowed for splits and prediction.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  Eigen::Index samples() const noexcept { return values_.rows(); }
  Eigen::Index features() const noexcept { return values_.cols(); }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Matrix values_;
};

/// n x c logical labels in {0,1}; c >= 2 and every row has a positive label.
class LogicalLabelMatrix {
 public:
  explicit LogicalLabelMatrix(LabelMatrix values);

  const LabelMatrix& values() const noexcept { return values_; }
  Eigen::Index samples() const noexcept { return values_.rows(); }
  Eigen::Index labels() const noexcept { return values_.cols(); }

  friend bool operator==(const LogicalLabelMatrix& a, const LogicalLabelMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  LabelMatrix values_;
};

struct Dataset {
  FeatureMatrix X;
  LogicalLabelMatrix Y;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Hyperparameters of the joint model and its solvers.
struct HyperParams {
  double alpha = 0.01;  // Laplacian smoothness weight
  double beta = 0.01;   // ||D||_F^2 weight
  double gamma = 0.01;  // ||W||_F^2 weight
  int k_neighbors = 20;
  std::optional<double> sigma;  // RBF bandwidth; empty selects the median kNN distance
  int outer_iters = 5;
  double rho = 1.2;
  double tau_init = 0.001;
  double tau_max = 10.0;
  double admm_tol = 1e-3;
  int admm_max_iters = 500;
  double qp_tol = 1e-9;
  int d_inner_iters = 50;
  double d_step_tol = 1e-6;
  double w_grad_tol = 1e-5;
  int w_max_iters = 200;
  double outer_rel_tol = 1e-6;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument if any field is out of range.
  void validate() const;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Checks every type invariant of (X, Y) and their row agreement.
Dataset validate_dataset(Matrix X, LabelMatrix Y);
Dataset validate_dataset(const Dataset& data);

bool row_is_distribution(std::span<const double> d, std::span<const std::uint8_t> y, double tol);

/// Throws unless every row of D is a distribution dominated by Y.
void check_distribution(const Matrix& D, const LabelMatrix& Y, double tol);
/// Throws unless every row of D is a distribution.
void check_distribution(const Matrix& D, double tol);

inline std::span<const double> row_span(const Matrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}
inline std::span<const std::uint8_t> row_span(const LabelMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace dldl
