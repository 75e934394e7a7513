#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dldl/dataset.hpp"
#include "dldl/experiment.hpp"
#include "dldl/graph.hpp"
#include "dldl/metrics.hpp"
#include "dldl/report.hpp"
#include "dldl/solver.hpp"

namespace py = pybind11;
using namespace dldl;

namespace {

// Taking labels as doubles keeps fractional input from being truncated to 0/1 on the way in.
LogicalLabelMatrix to_labels(const Matrix& Y) {
  LabelMatrix out(Y.rows(), Y.cols());
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
      const double v = Y(i, j);
      if (v != 0.0 && v != 1.0) throw Error(ErrorCode::NonBinaryLabel, "labels must be 0 or 1", i);
      out(i, j) = static_cast<std::uint8_t>(v);
    }
  }
  return LogicalLabelMatrix(std::move(out));
}

Matrix from_labels(const LogicalLabelMatrix& Y) { return Y.values().cast<double>(); }

py::object json_to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict metrics_dict(const MetricReport& r) { return json_to_py(to_json(r)); }

}  // namespace

PYBIND11_MODULE(_dldl, m) {
  m.doc() = "Label distributions learned directly from logical labels";

  static py::exception<Error> dldl_error(m, "DldlError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = dldl_error;
      py::object inst = err(e.what());
      inst.attr("code") = to_string(e.code());
      PyErr_SetObject(dldl_error.ptr(), inst.ptr());
    }
  });

  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_readwrite("alpha", &HyperParams::alpha)
      .def_readwrite("beta", &HyperParams::beta)
      .def_readwrite("gamma", &HyperParams::gamma)
      .def_readwrite("k_neighbors", &HyperParams::k_neighbors)
      .def_readwrite("sigma", &HyperParams::sigma)
      .def_readwrite("outer_iters", &HyperParams::outer_iters)
      .def_readwrite("rho", &HyperParams::rho)
      .def_readwrite("tau_init", &HyperParams::tau_init)
      .def_readwrite("tau_max", &HyperParams::tau_max)
      .def_readwrite("admm_tol", &HyperParams::admm_tol)
      .def_readwrite("admm_max_iters", &HyperParams::admm_max_iters)
      .def_readwrite("qp_tol", &HyperParams::qp_tol)
      .def_readwrite("d_inner_iters", &HyperParams::d_inner_iters)
      .def_readwrite("d_step_tol", &HyperParams::d_step_tol)
      .def_readwrite("w_grad_tol", &HyperParams::w_grad_tol)
      .def_readwrite("w_max_iters", &HyperParams::w_max_iters)
      .def_readwrite("outer_rel_tol", &HyperParams::outer_rel_tol)
      .def_readwrite("seed", &HyperParams::seed)
      .def("validate", &HyperParams::validate)
      .def("to_dict", [](const HyperParams& p) { return json_to_py(to_json(p)); })
      .def_static("from_dict", [](py::dict d) {
        const std::string text = py::module_::import("json").attr("dumps")(d).cast<std::string>();
        return hyperparams_from_json(Json::parse(text));
      });

  m.def(
      "synth",
      [](int n, int m_, int c, int clusters, double temperature, double sparsify, std::uint64_t seed) {
        const LdlDataset d = synth_dataset(SynthSpec{n, m_, c, clusters, temperature, sparsify, seed});
        return py::make_tuple(d.X.values(), *d.D_true);
      },
      py::arg("n") = 200, py::arg("m") = 10, py::arg("c") = 5, py::arg("n_clusters") = 5,
      py::arg("temperature") = 1.0, py::arg("sparsify_delta") = 0.01, py::arg("seed") = 0,
      "Clustered synthetic data; returns (X, D_true).");

  m.def(
      "binarize", [](const Matrix& D, double delta) { return from_labels(binarize(D, delta)); },
      py::arg("D"), py::arg("delta") = 0.01, "Y[i,j] = 1 where D[i,j] > delta.");

  m.def(
      "knn_similarity",
      [](const Matrix& X, int k, std::optional<double> sigma) {
        const SimilarityMatrix A = knn_similarity(FeatureMatrix(X), k, sigma);
        return py::make_tuple(A.values, A.sigma);
      },
      py::arg("X"), py::arg("k") = 20, py::arg("sigma") = py::none(),
      "Symmetrized kNN RBF similarity; returns (A, sigma).");

  m.def("laplacian", py::overload_cast<const Matrix&>(&laplacian), py::arg("A"));

  m.def(
      "project",
      [](const Eigen::VectorXd& v, const Matrix& y, double tol) {
        if (y.rows() != 1 || y.cols() != v.size()) {
          throw Error(ErrorCode::LengthMismatch, "y must be one row matching v");
        }
        const LogicalLabelMatrix yl = to_labels(y);
        return Eigen::VectorXd(capped_simplex_project(std::span<const double>(v.data(), v.size()),
                                                      row_span(yl.values(), 0), tol));
      },
      py::arg("v"), py::arg("y"), py::arg("tol") = 1e-9,
      "Euclidean projection onto {b >= 0, sum b = 1, b <= y}; y is passed as a 1 x c array.");

  m.def(
      "fit",
      [](const Matrix& X, const Matrix& Y, const HyperParams& params) {
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit(FeatureMatrix(X), to_labels(Y), params);
        }
        py::list trace;
        for (const auto& o : r.objective_trace) trace.append(o.total);
        py::dict out;
        out["W"] = r.W;
        out["D"] = r.D;
        out["initial_objective"] = r.initial_objective.total;
        out["objective_trace"] = trace;
        out["converged"] = r.converged;
        return out;
      },
      py::arg("X"), py::arg("Y"), py::arg("params") = HyperParams{},
      "Alternating fit; returns a dict with W, D, initial_objective, objective_trace, converged.");

  m.def(
      "predict", [](const Matrix& W, const Matrix& X) { return predict_unseen(W, FeatureMatrix(X)); },
      py::arg("W"), py::arg("X"));

  m.def(
      "evaluate",
      [](const Matrix& truth, const Matrix& pred, const std::string& variant) {
        return metrics_dict(evaluate(truth, pred, one_error_variant_from_string(variant)));
      },
      py::arg("truth"), py::arg("pred"), py::arg("one_error_variant") = "irrelevant");

  m.def(
      "baseline_recover", [](const Matrix& Y) { return baseline_recover(to_labels(Y)); },
      py::arg("Y"));

  m.def(
      "run_experiment",
      [](const Matrix& X, const Matrix& D, double delta, std::uint64_t seed, const HyperParams& params,
         std::optional<std::vector<double>> alpha_grid, std::optional<std::vector<double>> beta_grid,
         std::optional<std::vector<double>> gamma_grid, const std::string& variant, unsigned threads) {
        LdlDataset data{"python", FeatureMatrix(X), D, std::nullopt};
        GridSpec grid;
        if (alpha_grid) grid.alpha_grid = *alpha_grid;
        if (beta_grid) grid.beta_grid = *beta_grid;
        if (gamma_grid) grid.gamma_grid = *gamma_grid;
        HyperParams p = params;
        p.seed = seed;
        const ExperimentOptions options{one_error_variant_from_string(variant), false, threads};
        Json j;
        {
          py::gil_scoped_release release;
          j = to_json(run_experiment(data, SplitSpec{0.6, 0.2, 0.2, seed}, grid, p, delta, options));
        }
        return json_to_py(j);
      },
      py::arg("X"), py::arg("D"), py::arg("delta") = 0.01, py::arg("seed") = 0,
      py::arg("params") = HyperParams{}, py::arg("alpha_grid") = py::none(),
      py::arg("beta_grid") = py::none(), py::arg("gamma_grid") = py::none(),
      py::arg("one_error_variant") = "irrelevant", py::arg("threads") = 0,
      "Full protocol on (X, D_true); returns the report as a dict.");
}
