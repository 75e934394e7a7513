#include "dldl/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace dldl {

namespace {

template <typename T>
void read_if(const Json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

Json to_json(const ObjectiveBreakdown& o) {
  return Json{{"kl_term", o.kl_term},
              {"laplacian_term", o.laplacian_term},
              {"d_frob_term", o.d_frob_term},
              {"w_frob_term", o.w_frob_term},
              {"total", o.total}};
}

ObjectiveBreakdown breakdown_from_json(const Json& j) {
  ObjectiveBreakdown o;
  j.at("kl_term").get_to(o.kl_term);
  j.at("laplacian_term").get_to(o.laplacian_term);
  j.at("d_frob_term").get_to(o.d_frob_term);
  j.at("w_frob_term").get_to(o.w_frob_term);
  j.at("total").get_to(o.total);
  return o;
}

Json to_json(const OuterDiagnostics& d) {
  return Json{{"admm",
               {{"iterations", d.admm.iterations},
                {"residual_inf", d.admm.residual_inf},
                {"final_tau", d.admm.final_tau},
                {"converged", d.admm.converged},
                {"d_steps", d.admm.d_steps},
                {"line_search_stalls", d.admm.line_search_stalls}}},
              {"w_iterations", d.w_iterations},
              {"w_grad_norm", d.w_grad_norm},
              {"w_line_search_stalled", d.w_line_search_stalled},
              {"d_step_accepted", d.d_step_accepted}};
}

OuterDiagnostics outer_diagnostics_from_json(const Json& j) {
  OuterDiagnostics d;
  const Json& a = j.at("admm");
  a.at("iterations").get_to(d.admm.iterations);
  a.at("residual_inf").get_to(d.admm.residual_inf);
  a.at("final_tau").get_to(d.admm.final_tau);
  a.at("converged").get_to(d.admm.converged);
  a.at("d_steps").get_to(d.admm.d_steps);
  a.at("line_search_stalls").get_to(d.admm.line_search_stalls);
  j.at("w_iterations").get_to(d.w_iterations);
  j.at("w_grad_norm").get_to(d.w_grad_norm);
  j.at("w_line_search_stalled").get_to(d.w_line_search_stalled);
  j.at("d_step_accepted").get_to(d.d_step_accepted);
  return d;
}

Json to_json(const GridCell& c) {
  return Json{{"alpha", c.alpha},           {"beta", c.beta},
              {"gamma", c.gamma},           {"alpha_index", c.alpha_index},
              {"beta_index", c.beta_index}, {"gamma_index", c.gamma_index},
              {"score", c.score},           {"failed", c.failed},
              {"error", c.error}};
}

GridCell grid_cell_from_json(const Json& j) {
  GridCell c;
  j.at("alpha").get_to(c.alpha);
  j.at("beta").get_to(c.beta);
  j.at("gamma").get_to(c.gamma);
  j.at("alpha_index").get_to(c.alpha_index);
  j.at("beta_index").get_to(c.beta_index);
  j.at("gamma_index").get_to(c.gamma_index);
  j.at("score").get_to(c.score);
  j.at("failed").get_to(c.failed);
  j.at("error").get_to(c.error);
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) throw Error(ErrorCode::IoError, "empty output path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace

Json to_json(const HyperParams& p) {
  Json j;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["gamma"] = p.gamma;
  j["k_neighbors"] = p.k_neighbors;
  j["sigma"] = p.sigma ? Json(*p.sigma) : Json("auto");
  j["outer_iters"] = p.outer_iters;
  j["rho"] = p.rho;
  j["tau_init"] = p.tau_init;
  j["tau_max"] = p.tau_max;
  j["admm_tol"] = p.admm_tol;
  j["admm_max_iters"] = p.admm_max_iters;
  j["qp_tol"] = p.qp_tol;
  j["d_inner_iters"] = p.d_inner_iters;
  j["d_step_tol"] = p.d_step_tol;
  j["w_grad_tol"] = p.w_grad_tol;
  j["w_max_iters"] = p.w_max_iters;
  j["outer_rel_tol"] = p.outer_rel_tol;
  j["seed"] = p.seed;
  return j;
}

HyperParams hyperparams_from_json(const Json& j, HyperParams p) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "hyperparameters must be an object");
  const Json known = to_json(HyperParams{});
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) {
      throw Error(ErrorCode::ParseError, "unknown hyperparameter '" + item.key() + "'");
    }
  }
  try {
    read_if(j, "alpha", p.alpha);
    read_if(j, "beta", p.beta);
    read_if(j, "gamma", p.gamma);
    read_if(j, "k_neighbors", p.k_neighbors);
    if (j.contains("sigma")) {
      const Json& s = j.at("sigma");
      if (s.is_string() && s.get<std::string>() == "auto") {
        p.sigma.reset();
      } else {
        p.sigma = s.get<double>();
      }
    }
    read_if(j, "outer_iters", p.outer_iters);
    read_if(j, "rho", p.rho);
    read_if(j, "tau_init", p.tau_init);
    read_if(j, "tau_max", p.tau_max);
    read_if(j, "admm_tol", p.admm_tol);
    read_if(j, "admm_max_iters", p.admm_max_iters);
    read_if(j, "qp_tol", p.qp_tol);
    read_if(j, "d_inner_iters", p.d_inner_iters);
    read_if(j, "d_step_tol", p.d_step_tol);
    read_if(j, "w_grad_tol", p.w_grad_tol);
    read_if(j, "w_max_iters", p.w_max_iters);
    read_if(j, "outer_rel_tol", p.outer_rel_tol);
    read_if(j, "seed", p.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return p;
}

Json to_json(const MetricReport& r) {
  return Json{{"chebyshev", r.chebyshev},
              {"clark", r.clark},
              {"one_error", r.one_error},
              {"intersection", r.intersection},
              {"n_instances", r.n_instances},
              {"one_error_variant", to_string(r.one_error_variant)}};
}

MetricReport metric_report_from_json(const Json& j) {
  MetricReport r;
  j.at("chebyshev").get_to(r.chebyshev);
  j.at("clark").get_to(r.clark);
  j.at("one_error").get_to(r.one_error);
  j.at("intersection").get_to(r.intersection);
  j.at("n_instances").get_to(r.n_instances);
  r.one_error_variant = one_error_variant_from_string(j.at("one_error_variant").get<std::string>());
  return r;
}

Json to_json(const ExperimentReport& r) {
  Json j;
  j["dataset"] = r.dataset;
  j["hyperparameters"] = to_json(r.hyperparameters);
  j["delta"] = r.delta;
  j["recovery"] = to_json(r.recovery);
  j["predictive"] = to_json(r.predictive);
  Json baselines = Json::array();
  for (const auto& b : r.baselines) {
    baselines.push_back(
        Json{{"method", b.method}, {"recovery", to_json(b.recovery)}, {"predictive", to_json(b.predictive)}});
  }
  j["baselines"] = std::move(baselines);

  Json diag;
  diag["initial_objective"] = to_json(r.solver_diagnostics.initial_objective);
  Json outer = Json::array();
  for (const auto& o : r.solver_diagnostics.outer) {
    outer.push_back(Json{{"objective", to_json(o.objective)}, {"diagnostics", to_json(o.diagnostics)}});
  }
  diag["outer"] = std::move(outer);
  diag["converged"] = r.solver_diagnostics.converged;
  Json grid = Json::array();
  for (const auto& c : r.solver_diagnostics.grid) grid.push_back(to_json(c));
  diag["grid"] = std::move(grid);
  j["solver_diagnostics"] = std::move(diag);

  if (r.wall_clock) {
    j["wall_clock"] = Json{{"grid_seconds", r.wall_clock->grid_seconds},
                           {"fit_seconds", r.wall_clock->fit_seconds},
                           {"total_seconds", r.wall_clock->total_seconds}};
  } else {
    j["wall_clock"] = nullptr;
  }
  j["seed"] = r.seed;
  j["one_error_variant"] = to_string(r.one_error_variant);
  return j;
}

ExperimentReport experiment_report_from_json(const Json& j) {
  ExperimentReport r;
  try {
    j.at("dataset").get_to(r.dataset);
    r.hyperparameters = hyperparams_from_json(j.at("hyperparameters"));
    j.at("delta").get_to(r.delta);
    r.recovery = metric_report_from_json(j.at("recovery"));
    r.predictive = metric_report_from_json(j.at("predictive"));
    for (const auto& b : j.at("baselines")) {
      r.baselines.push_back(Baseline{b.at("method").get<std::string>(),
                                     metric_report_from_json(b.at("recovery")),
                                     metric_report_from_json(b.at("predictive"))});
    }
    const Json& diag = j.at("solver_diagnostics");
    r.solver_diagnostics.initial_objective = breakdown_from_json(diag.at("initial_objective"));
    for (const auto& o : diag.at("outer")) {
      r.solver_diagnostics.outer.push_back(
          OuterRecord{breakdown_from_json(o.at("objective")), outer_diagnostics_from_json(o.at("diagnostics"))});
    }
    diag.at("converged").get_to(r.solver_diagnostics.converged);
    for (const auto& c : diag.at("grid")) r.solver_diagnostics.grid.push_back(grid_cell_from_json(c));
    const Json& wc = j.at("wall_clock");
    if (!wc.is_null()) {
      r.wall_clock = WallClock{wc.at("grid_seconds").get<double>(), wc.at("fit_seconds").get<double>(),
                               wc.at("total_seconds").get<double>()};
    }
    j.at("seed").get_to(r.seed);
    r.one_error_variant = one_error_variant_from_string(j.at("one_error_variant").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return r;
}

std::string format_report(const ExperimentReport& report) { return to_json(report).dump(2) + "\n"; }

ExperimentReport parse_report(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return experiment_report_from_json(j);
}

std::string format_metric_table(const std::vector<NamedReport>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "method";
  for (Metric m : kAllMetrics) os << ',' << to_string(m) << ',' << to_string(m) << "_rank";
  os << ",avg_rank\n";
  const Ranking ranking = rows.size() >= 2 ? rank_methods(rows) : Ranking{};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    os << rows[r].method;
    for (std::size_t m = 0; m < std::size(kAllMetrics); ++m) {
      os << ',' << metric_value(rows[r].report, kAllMetrics[m]) << ',';
      os << (ranking.ranks.empty() ? 1.0 : ranking.ranks[m][r]);
    }
    os << ',' << (ranking.average_rank.empty() ? 1.0 : ranking.average_rank[r]) << '\n';
  }
  return os.str();
}

void write_report(const ExperimentReport& report, const std::string& path, ReportFormat format) {
  if (path.empty()) throw Error(ErrorCode::IoError, "empty output path");
  if (format == ReportFormat::StructuredText) {
    write_text(path, format_report(report));
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + path + "': " + ec.message());
  std::vector<NamedReport> recovery{{"DLDL", report.recovery}};
  std::vector<NamedReport> predictive{{"DLDL", report.predictive}};
  for (const auto& b : report.baselines) {
    recovery.push_back({b.method, b.recovery});
    predictive.push_back({b.method, b.predictive});
  }
  write_text(path + "/recovery.csv", format_metric_table(recovery));
  write_text(path + "/predictive.csv", format_metric_table(predictive));
}

ExperimentReport read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_report(os.str());
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw Error(ErrorCode::ParseError, "matrix must be a nonempty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorCode::ParseError, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace dldl
