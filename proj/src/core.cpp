#include "dldl/core.hpp"

#include <cmath>
#include <sstream>

namespace dldl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RowCountMismatch: return "RowCountMismatch";
    case ErrorCode::AllZeroLabelRow: return "AllZeroLabelRow";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::SigmaNonPositive: return "SigmaNonPositive";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonPositivePrediction: return "NonPositivePrediction";
    case ErrorCode::NegativeD: return "NegativeD";
    case ErrorCode::InfeasibleCap: return "InfeasibleCap";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateRow: return "DegenerateRow";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::AllCellsFailed: return "AllCellsFailed";
  }
  return "Unknown";
}

namespace {

std::string describe(ErrorCode code, const std::string& what, std::optional<std::size_t> index) {
  std::ostringstream os;
  os << to_string(code);
  if (index) os << "(" << *index << ")";
  if (!what.empty()) os << ": " << what;
  return os.str();
}

}  // namespace

Error::Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index)
    : std::runtime_error(describe(code, what, index)), code_(code), index_(index) {}

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorCode::TooSmall, "feature matrix needs n >= 1 and m >= 1");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (!std::isfinite(values_(i, j))) {
        throw Error(ErrorCode::NonFiniteEntry,
                    "X(" + std::to_string(i) + "," + std::to_string(j) + ")",
                    static_cast<std::size_t>(i));
      }
    }
  }
}

LogicalLabelMatrix::LogicalLabelMatrix(LabelMatrix values) : values_(std::move(values)) {
  if (values_.cols() < 2 || values_.rows() < 1) {
    throw Error(ErrorCode::TooSmall, "label matrix needs c >= 2 and n >= 1");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      const auto v = values_(i, j);
      if (v > 1) {
        throw Error(ErrorCode::NonBinaryLabel,
                    "Y(" + std::to_string(i) + "," + std::to_string(j) + ")",
                    static_cast<std::size_t>(i));
      }
      any = any || v == 1;
    }
    if (!any) throw Error(ErrorCode::AllZeroLabelRow, "no positive label", static_cast<std::size_t>(i));
  }
}

void HyperParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
  };
  require(alpha >= 0 && std::isfinite(alpha), "alpha must be a finite nonnegative number");
  require(beta >= 0 && std::isfinite(beta), "beta must be a finite nonnegative number");
  require(gamma >= 0 && std::isfinite(gamma), "gamma must be a finite nonnegative number");
  require(k_neighbors > 0, "k_neighbors must be positive");
  if (sigma && !(*sigma > 0)) throw Error(ErrorCode::SigmaNonPositive, "sigma must be positive");
  require(outer_iters > 0, "outer_iters must be positive");
  require(rho > 1, "rho must exceed 1");
  require(tau_init > 0, "tau_init must be positive");
  require(tau_max >= tau_init, "tau_max must be >= tau_init");
  require(admm_tol > 0, "admm_tol must be positive");
  require(admm_max_iters > 0, "admm_max_iters must be positive");
  require(qp_tol > 0, "qp_tol must be positive");
  require(d_inner_iters > 0, "d_inner_iters must be positive");
  require(d_step_tol > 0, "d_step_tol must be positive");
  require(w_grad_tol > 0, "w_grad_tol must be positive");
  require(w_max_iters > 0, "w_max_iters must be positive");
  require(outer_rel_tol >= 0, "outer_rel_tol must be nonnegative");
}

Dataset validate_dataset(Matrix X, LabelMatrix Y) {
  if (X.rows() != Y.rows()) {
    throw Error(ErrorCode::RowCountMismatch, "X has " + std::to_string(X.rows()) +
                                                 " rows, Y has " + std::to_string(Y.rows()));
  }
  // Label checks first: an all-zero row makes the instance infeasible regardless of X.
  LogicalLabelMatrix labels(std::move(Y));
  FeatureMatrix features(std::move(X));
  if (features.samples() < 2) throw Error(ErrorCode::TooSmall, "a training set needs n >= 2");
  return Dataset{std::move(features), std::move(labels)};
}

Dataset validate_dataset(const Dataset& data) {
  return validate_dataset(data.X.values(), data.Y.values());
}

bool row_is_distribution(std::span<const double> d, std::span<const std::uint8_t> y, double tol) {
  if (d.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "d has " + std::to_string(d.size()) + " entries, y has " + std::to_string(y.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (!(d[j] >= 0.0) || d[j] > static_cast<double>(y[j])) return false;
    sum += d[j];
  }
  return std::abs(sum - 1.0) <= tol;
}

void check_distribution(const Matrix& D, const LabelMatrix& Y, double tol) {
  if (D.rows() != Y.rows() || D.cols() != Y.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "D and Y differ in shape");
  }
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    if (!row_is_distribution(row_span(D, i), row_span(Y, i), tol)) {
      throw Error(ErrorCode::RowSumViolation, "row is not a distribution dominated by Y",
                  static_cast<std::size_t>(i));
    }
  }
}

void check_distribution(const Matrix& D, double tol) {
  LabelMatrix ones = LabelMatrix::Ones(D.rows(), D.cols());
  check_distribution(D, ones, tol);
}

}  // namespace dldl
