#pragma once

#include <string>
#include <vector>

#include "dldl/core.hpp"

namespace dldl {

/// Which top-label criterion One-error counts as a miss.
enum class OneErrorVariant {
  Top1Mismatch,    // argmax of the prediction differs from argmax of the truth
  Top1Irrelevant,  // the truth assigns 0 to the predicted top label
};

const char* to_string(OneErrorVariant variant);
OneErrorVariant one_error_variant_from_string(const std::string& name);

struct MetricReport {
  double chebyshev = 0.0;
  double clark = 0.0;
  double one_error = 0.0;
  double intersection = 0.0;
  long n_instances = 0;
  OneErrorVariant one_error_variant = OneErrorVariant::Top1Irrelevant;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

double chebyshev(const Matrix& truth, const Matrix& pred);
double clark(const Matrix& truth, const Matrix& pred);
double one_error(const Matrix& truth, const Matrix& pred,
                 OneErrorVariant variant = OneErrorVariant::Top1Irrelevant);
double intersection(const Matrix& truth, const Matrix& pred);

MetricReport evaluate(const Matrix& truth, const Matrix& pred,
                      OneErrorVariant variant = OneErrorVariant::Top1Irrelevant);

/// Row-normalized logical labels: uniform over each row's positive labels.
Matrix baseline_recover(const LogicalLabelMatrix& Y);

enum class Metric { Chebyshev, Clark, OneError, Intersection };

inline constexpr Metric kAllMetrics[] = {Metric::Chebyshev, Metric::Clark, Metric::OneError,
                                         Metric::Intersection};

const char* to_string(Metric metric);
Metric metric_from_string(const std::string& name);
/// Intersection is a similarity; the other three are distances.
bool higher_is_better(Metric metric);
double metric_value(const MetricReport& report, Metric metric);

struct NamedReport {
  std::string method;
  MetricReport report;
};

struct Ranking {
  std::vector<std::string> methods;
  std::vector<std::vector<double>> ranks;  // ranks[metric][method], ties share the mean rank
  std::vector<double> average_rank;        // per method, across the four metrics
};

Ranking rank_methods(const std::vector<NamedReport>& reports);

}  // namespace dldl
