#include "dldl/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dldl {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "metric inputs differ in shape");
  }
  if (a.rows() == 0) throw Error(ErrorCode::EmptyInput, "no instances to score");
}

// First index of the row maximum.
Eigen::Index argmax(const Matrix& m, Eigen::Index i) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j) {
    if (m(i, j) > m(i, best)) best = j;
  }
  return best;
}

}  // namespace

const char* to_string(OneErrorVariant variant) {
  return variant == OneErrorVariant::Top1Mismatch ? "top1-mismatch" : "top1-irrelevant";
}

OneErrorVariant one_error_variant_from_string(const std::string& name) {
  if (name == "top1-mismatch" || name == "mismatch") return OneErrorVariant::Top1Mismatch;
  if (name == "top1-irrelevant" || name == "irrelevant") return OneErrorVariant::Top1Irrelevant;
  throw Error(ErrorCode::InvalidArgument, "unknown one-error variant '" + name + "'");
}

double chebyshev(const Matrix& truth, const Matrix& pred) {
  require_same_shape(truth, pred);
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    total += (truth.row(i) - pred.row(i)).cwiseAbs().maxCoeff();
  }
  return total / static_cast<double>(truth.rows());
}

double clark(const Matrix& truth, const Matrix& pred) {
  require_same_shape(truth, pred);
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
      const double num = truth(i, j) - pred(i, j);
      const double den = truth(i, j) + pred(i, j);
      if (den != 0.0) acc += (num * num) / (den * den);  // 0/0 contributes 0
    }
    total += std::sqrt(acc);
  }
  return total / static_cast<double>(truth.rows());
}

double one_error(const Matrix& truth, const Matrix& pred, OneErrorVariant variant) {
  require_same_shape(truth, pred);
  long misses = 0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    const Eigen::Index top = argmax(pred, i);
    const bool miss = variant == OneErrorVariant::Top1Mismatch ? top != argmax(truth, i)
                                                               : truth(i, top) == 0.0;
    misses += miss ? 1 : 0;
  }
  return static_cast<double>(misses) / static_cast<double>(truth.rows());
}

double intersection(const Matrix& truth, const Matrix& pred) {
  require_same_shape(truth, pred);
  return truth.cwiseMin(pred).sum() / static_cast<double>(truth.rows());
}

MetricReport evaluate(const Matrix& truth, const Matrix& pred, OneErrorVariant variant) {
  MetricReport r;
  r.chebyshev = chebyshev(truth, pred);
  r.clark = clark(truth, pred);
  r.one_error = one_error(truth, pred, variant);
  r.intersection = intersection(truth, pred);
  r.n_instances = static_cast<long>(truth.rows());
  r.one_error_variant = variant;
  return r;
}

Matrix baseline_recover(const LogicalLabelMatrix& Y) {
  Matrix D = Y.values().cast<double>();
  for (Eigen::Index i = 0; i < D.rows(); ++i) D.row(i) /= D.row(i).sum();
  return D;
}

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::Chebyshev: return "chebyshev";
    case Metric::Clark: return "clark";
    case Metric::OneError: return "one_error";
    case Metric::Intersection: return "intersection";
  }
  return "unknown";
}

Metric metric_from_string(const std::string& name) {
  for (Metric m : kAllMetrics) {
    if (name == to_string(m)) return m;
  }
  if (name == "one-error") return Metric::OneError;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + name + "'");
}

bool higher_is_better(Metric metric) { return metric == Metric::Intersection; }

double metric_value(const MetricReport& report, Metric metric) {
  switch (metric) {
    case Metric::Chebyshev: return report.chebyshev;
    case Metric::Clark: return report.clark;
    case Metric::OneError: return report.one_error;
    case Metric::Intersection: return report.intersection;
  }
  return 0.0;
}

Ranking rank_methods(const std::vector<NamedReport>& reports) {
  if (reports.size() < 2) throw Error(ErrorCode::EmptyInput, "ranking needs at least two methods");
  const std::size_t count = reports.size();
  Ranking out;
  for (const auto& r : reports) out.methods.push_back(r.method);
  out.average_rank.assign(count, 0.0);

  for (Metric metric : kAllMetrics) {
    std::vector<double> ranks(count);
    for (std::size_t a = 0; a < count; ++a) {
      const double va = metric_value(reports[a].report, metric);
      std::size_t better = 0;
      std::size_t equal = 0;
      for (std::size_t b = 0; b < count; ++b) {
        const double vb = metric_value(reports[b].report, metric);
        if (vb == va) {
          ++equal;
        } else if (higher_is_better(metric) ? vb > va : vb < va) {
          ++better;
        }
      }
      // Tied entries occupy ranks better+1 .. better+equal.
      ranks[a] = static_cast<double>(better) + 0.5 * static_cast<double>(equal + 1);
    }
    for (std::size_t a = 0; a < count; ++a) out.average_rank[a] += ranks[a];
    out.ranks.push_back(std::move(ranks));
  }
  for (double& r : out.average_rank) r /= static_cast<double>(std::size(kAllMetrics));
  return out;
}

}  // namespace dldl
