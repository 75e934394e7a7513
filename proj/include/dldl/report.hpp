#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "dldl/experiment.hpp"

namespace dldl {

using Json = nlohmann::ordered_json;

enum class ReportFormat {
  StructuredText,  // one JSON document holding every ExperimentReport field
  CsvTables,       // recovery.csv and predictive.csv, methods x metrics with ranks
};

Json to_json(const HyperParams& params);
/// Missing keys keep their defaults, so a partial config file is accepted.
HyperParams hyperparams_from_json(const Json& j, HyperParams base = {});

Json to_json(const MetricReport& report);
MetricReport metric_report_from_json(const Json& j);

Json to_json(const ExperimentReport& report);
ExperimentReport experiment_report_from_json(const Json& j);

std::string format_report(const ExperimentReport& report);
ExperimentReport parse_report(const std::string& text);

/// One table per experiment kind: header, one row per method.
std::string format_metric_table(const std::vector<NamedReport>& rows);

/// StructuredText writes `path`; CsvTables treats `path` as a directory.
void write_report(const ExperimentReport& report, const std::string& path, ReportFormat format);
ExperimentReport read_report(const std::string& path);

/// Dense matrices as arrays of rows.
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

}  // namespace dldl
