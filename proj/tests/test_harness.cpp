#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dldl/dataset.hpp"
#include "dldl/experiment.hpp"
#include "dldl/report.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dldl;
using testing_support::mat;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("dldl_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

HyperParams small_graph() {
  HyperParams p;
  p.k_neighbors = 5;
  return p;
}

GridSpec tiny_grid() {
  GridSpec g;
  g.alpha_grid = {0.1, 10.0};
  g.beta_grid = {0.01};
  g.gamma_grid = {0.01, 1.0};
  return g;
}

}  // namespace

TEST(ParseDataset, LabelDistributionFile) {
  const LdlDataset d = parse_dataset("f0,f1,d0,d1\n1,2,0.25,0.75\n3,4,1,0\n",
                                     CsvFormat::LabelDistribution, "two");
  EXPECT_EQ(d.name, "two");
  EXPECT_EQ(d.X.values(), mat({{1, 2}, {3, 4}}));
  ASSERT_TRUE(d.D_true);
  EXPECT_EQ(*d.D_true, mat({{0.25, 0.75}, {1, 0}}));
  EXPECT_FALSE(d.Y);
}

TEST(ParseDataset, RenormalizesWithinTolerance) {
  const LdlDataset d = parse_dataset("f0,d0,d1\n1,0.50004,0.5\n2,0.5,0.5\n",
                                     CsvFormat::LabelDistribution, "x");
  EXPECT_NEAR(d.D_true->row(0).sum(), 1.0, 1e-15);
}

TEST(ParseDataset, Errors) {
  const auto line_of = [](const std::string& text, CsvFormat f, ErrorCode code) {
    try {
      parse_dataset(text, f, "x");
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
      return e.index().value_or(0);
    }
    ADD_FAILURE() << "expected " << to_string(code);
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("f0,d0,d1\n1,0.5,0.5\n2,0.5,0.4\n", CsvFormat::LabelDistribution,
                    ErrorCode::RowSumViolation),
            3u);
  EXPECT_EQ(line_of("f0,y0,y1,y2\n1,1,0,0\n2,0,0,0\n", CsvFormat::Logical, ErrorCode::AllZeroLabelRow),
            3u);
  line_of("f0,d0,d1\n1,abc,0.5\n", CsvFormat::LabelDistribution, ErrorCode::ParseError);
  line_of("f0,d0,d1\n1,0.5\n", CsvFormat::LabelDistribution, ErrorCode::ParseError);
  line_of("x0,d0,d1\n1,0.5,0.5\n", CsvFormat::LabelDistribution, ErrorCode::HeaderMismatch);
  line_of("f0,d0,d1\n1,0.5,0.5\n", CsvFormat::Logical, ErrorCode::HeaderMismatch);
  line_of("f0,y0,y1\n1,1,0.5\n2,1,0\n", CsvFormat::Logical, ErrorCode::ParseError);
}

TEST(Dataset, FileRoundTripIsExact) {
  const fs::path dir = scratch_dir("roundtrip");
  SynthSpec spec;
  spec.n = 30;
  spec.m = 3;
  spec.c = 4;
  spec.seed = 5;
  LdlDataset d = synth_dataset(spec);
  write_dataset(d, (dir / "d.csv").string(), CsvFormat::LabelDistribution);
  const LdlDataset back = load_dataset((dir / "d.csv").string());
  EXPECT_EQ(back.name, "d");
  EXPECT_EQ(back.X, d.X);
  // Written rows may be renormalized on load, so compare within a few ulps.
  EXPECT_LE((*back.D_true - *d.D_true).cwiseAbs().maxCoeff(), 1e-15);

  d.Y = binarize(*d.D_true, 0.01);
  write_dataset(d, (dir / "y.csv").string(), CsvFormat::Logical);
  const LdlDataset logical = load_dataset((dir / "y.csv").string());
  ASSERT_TRUE(logical.Y);
  EXPECT_EQ(*logical.Y, *d.Y);
  EXPECT_FALSE(logical.D_true);

  EXPECT_DLDL_ERROR(write_dataset(d, "", CsvFormat::Logical), ErrorCode::IoError);
  EXPECT_DLDL_ERROR(load_dataset((dir / "missing.csv").string()), ErrorCode::IoError);
}

TEST(Binarize, Examples) {
  EXPECT_EQ(binarize(mat({{0.5, 0.495, 0.005}}), 0.01).values(), testing_support::labels({{1, 1, 0}}));
  EXPECT_EQ(binarize(mat({{0.01, 0.99}}), 0.01).values(), testing_support::labels({{0, 1}}));
  EXPECT_EQ(binarize(Matrix::Constant(1, 5, 0.2), 0.01).values(), LabelMatrix::Ones(1, 5));
  EXPECT_DLDL_ERROR(binarize(mat({{0.5, 0.5}, {0.5, 0.5}}), 0.6), ErrorCode::AllZeroLabelRow);
  EXPECT_DLDL_ERROR(binarize(mat({{0.5, 0.5}}), 0.0), ErrorCode::InvalidArgument);
}

TEST(Split, SizesAndDeterminism) {
  SynthSpec spec;
  spec.n = 10;
  spec.n_clusters = 2;
  const LdlDataset d = synth_dataset(spec);
  const Split a = split(d, SplitSpec{0.6, 0.2, 0.2, 0});
  EXPECT_EQ(a.train_idx.size(), 6u);
  EXPECT_EQ(a.val_idx.size(), 2u);
  EXPECT_EQ(a.test_idx.size(), 2u);
  const Split b = split(d, SplitSpec{0.6, 0.2, 0.2, 0});
  EXPECT_EQ(a.train_idx, b.train_idx);
  EXPECT_EQ(a.val_idx, b.val_idx);
  EXPECT_EQ(a.test_idx, b.test_idx);

  std::set<Eigen::Index> all;
  for (const auto* part : {&a.train_idx, &a.val_idx, &a.test_idx}) all.insert(part->begin(), part->end());
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(a.train.X.values().row(0), d.X.values().row(a.train_idx[0]));

  spec.n = 5;
  const Split five = split(synth_dataset(spec), SplitSpec{});
  EXPECT_EQ(five.train_idx.size(), 3u);
  EXPECT_EQ(five.val_idx.size(), 1u);
  EXPECT_EQ(five.test_idx.size(), 1u);

  spec.n = 4;
  EXPECT_DLDL_ERROR(split(synth_dataset(spec), SplitSpec{}), ErrorCode::TooFewSamples);
}

TEST(Synth, Properties) {
  SynthSpec spec;
  spec.n = 50;
  const LdlDataset a = synth_dataset(spec);
  const LdlDataset b = synth_dataset(spec);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(*a.D_true, *b.D_true);
  for (Eigen::Index i = 0; i < 50; ++i) {
    EXPECT_NEAR(a.D_true->row(i).sum(), 1.0, 1e-12);
    for (Eigen::Index j = 0; j < spec.c; ++j) {
      const double v = (*a.D_true)(i, j);
      EXPECT_TRUE(v == 0.0 || v >= spec.sparsify_delta);
    }
  }

  spec.sparsify_delta = 0.0;
  EXPECT_GT(synth_dataset(spec).D_true->minCoeff(), 0.0);

  spec.temperature = 1e6;
  const Matrix flat = *synth_dataset(spec).D_true;
  EXPECT_LE((flat.array() - 1.0 / spec.c).abs().maxCoeff(), 1e-3);

  spec.n_clusters = spec.n + 1;
  EXPECT_DLDL_ERROR(synth_dataset(spec), ErrorCode::InvalidArgument);
}

TEST(GridSearch, SingleCellIsSelected) {
  SynthSpec spec;
  spec.n = 40;
  spec.m = 4;
  spec.c = 3;
  LdlDataset d = synth_dataset(spec);
  d.Y = binarize(*d.D_true, 0.01);
  const Split s = split(d, SplitSpec{});
  GridSpec g;
  g.alpha_grid = {0.5};
  g.beta_grid = {0.2};
  g.gamma_grid = {0.3};
  const GridResult r = grid_search(s.train, s.val, g, small_graph());
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.best_cell, 0u);
  EXPECT_EQ(r.best.alpha, 0.5);
  EXPECT_EQ(r.best.beta, 0.2);
  EXPECT_EQ(r.best.gamma, 0.3);
}

TEST(GridSearch, TiesGoToTheEarliestCell) {
  SynthSpec spec;
  spec.n = 40;
  spec.m = 4;
  spec.c = 3;
  LdlDataset d = synth_dataset(spec);
  d.Y = binarize(*d.D_true, 0.01);
  const Split s = split(d, SplitSpec{});
  GridSpec g;
  g.alpha_grid = {0.5, 0.5};  // identical cells give identical scores
  g.beta_grid = {0.2};
  g.gamma_grid = {0.3};
  const GridResult r = grid_search(s.train, s.val, g, small_graph());
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells[0].score, r.cells[1].score);
  EXPECT_EQ(r.best_cell, 0u);
}

TEST(GridSearch, DefaultGridSelectsTheBestValidationCell) {
  SynthSpec spec;
  spec.n = 100;
  spec.m = 5;
  spec.c = 4;
  LdlDataset d = synth_dataset(spec);
  d.Y = binarize(*d.D_true, 0.01);
  const Split s = split(d, SplitSpec{});
  const GridSpec g;
  const GridResult r = grid_search(s.train, s.val, g, small_graph());
  ASSERT_EQ(r.cells.size(), 6u * 5u * 6u);
  const GridCell& best = r.cells[r.best_cell];
  EXPECT_FALSE(best.failed);
  for (const auto& c : r.cells) {
    if (!c.failed) EXPECT_LE(best.score, c.score);
  }
  // Cells are recorded in alpha-major grid order.
  for (std::size_t i = 1; i < r.cells.size(); ++i) {
    const auto key = [](const GridCell& c) { return std::tuple(c.alpha_index, c.beta_index, c.gamma_index); };
    EXPECT_LT(key(r.cells[i - 1]), key(r.cells[i]));
  }
}

TEST(GridSearch, ConcurrencyDoesNotChangeTheResult) {
  SynthSpec spec;
  spec.n = 60;
  spec.m = 4;
  spec.c = 3;
  LdlDataset d = synth_dataset(spec);
  d.Y = binarize(*d.D_true, 0.01);
  const Split s = split(d, SplitSpec{});
  const GridResult one = grid_search(s.train, s.val, tiny_grid(), small_graph(), 1);
  const GridResult four = grid_search(s.train, s.val, tiny_grid(), small_graph(), 4);
  EXPECT_EQ(one.cells, four.cells);
  EXPECT_EQ(one.best_cell, four.best_cell);
  EXPECT_EQ(one.best, four.best);
}

TEST(GridSearch, PreconditionsAndValidation) {
  SynthSpec spec;
  spec.n = 20;
  spec.c = 3;
  LdlDataset d = synth_dataset(spec);
  const Split s = split(d, SplitSpec{});
  EXPECT_DLDL_ERROR(grid_search(s.train, s.val, tiny_grid(), small_graph()), ErrorCode::PreconditionFailed);
  GridSpec bad = tiny_grid();
  bad.beta_grid.clear();
  EXPECT_DLDL_ERROR(bad.validate(), ErrorCode::InvalidArgument);
  bad.beta_grid = {-1.0};
  EXPECT_DLDL_ERROR(bad.validate(), ErrorCode::InvalidArgument);
}

TEST(GridSearch, GraphErrorsPropagate) {
  SynthSpec spec;
  spec.n = 20;
  spec.c = 3;
  LdlDataset d = synth_dataset(spec);
  d.Y = binarize(*d.D_true, 0.01);
  const Split s = split(d, SplitSpec{});
  HyperParams p = small_graph();
  p.k_neighbors = 12;  // the training split has only 12 samples
  EXPECT_DLDL_ERROR(grid_search(s.train, s.val, tiny_grid(), p), ErrorCode::KTooLarge);
}

TEST(GridSearch, AllFailingCellsIsAnError) {
  SynthSpec spec;
  spec.n = 30;
  spec.m = 4;
  spec.c = 3;
  LdlDataset train = synth_dataset(spec);
  train.Y = binarize(*train.D_true, 0.01);
  spec.c = 4;
  const LdlDataset val = synth_dataset(spec);  // label count disagrees, so every cell fails to score
  try {
    grid_search(train, val, tiny_grid(), small_graph());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllCellsFailed);
  }
}

namespace {

ExperimentReport small_experiment(std::uint64_t seed, bool timings = false) {
  SynthSpec spec;
  spec.n = 80;
  spec.m = 5;
  spec.c = 4;
  spec.seed = seed;
  return run_experiment(synth_dataset(spec), SplitSpec{0.6, 0.2, 0.2, seed}, tiny_grid(), small_graph(),
                        0.01, ExperimentOptions{OneErrorVariant::Top1Irrelevant, timings, 0});
}

}  // namespace

TEST(RunExperiment, ZeroOneErrorAndBaselineOnSmallData) {
  const ExperimentReport r = small_experiment(1);
  EXPECT_EQ(r.recovery.one_error, 0.0);
  EXPECT_EQ(r.recovery.n_instances, 48);
  EXPECT_EQ(r.predictive.n_instances, 16);
  ASSERT_EQ(r.baselines.size(), 1u);
  EXPECT_EQ(r.baselines[0].method, "baseline");
  EXPECT_EQ(r.seed, 1u);
  EXPECT_EQ(r.solver_diagnostics.grid.size(), 4u);
  EXPECT_FALSE(r.wall_clock);
  EXPECT_FALSE(r.solver_diagnostics.outer.empty());
}

TEST(RunExperiment, ReportsAreByteIdentical) {
  EXPECT_EQ(format_report(small_experiment(3)), format_report(small_experiment(3)));
}

TEST(RunExperiment, NeedsGroundTruth) {
  SynthSpec spec;
  spec.n = 30;
  LdlDataset d = synth_dataset(spec);
  d.Y = binarize(*d.D_true, 0.01);
  d.D_true.reset();
  EXPECT_DLDL_ERROR(run_experiment(d, SplitSpec{}, tiny_grid(), small_graph(), 0.01),
                    ErrorCode::PreconditionFailed);
}

TEST(WriteReport, StructuredTextRoundTrip) {
  const fs::path dir = scratch_dir("report");
  const ExperimentReport r = small_experiment(2, true);
  ASSERT_TRUE(r.wall_clock);
  const std::string path = (dir / "report.json").string();
  write_report(r, path, ReportFormat::StructuredText);
  EXPECT_EQ(read_report(path), r);

  const ExperimentReport untimed = small_experiment(2);
  write_report(untimed, path, ReportFormat::StructuredText);
  EXPECT_EQ(read_report(path), untimed);

  const Json j = Json::parse(slurp(path));
  for (const char* key : {"dataset", "hyperparameters", "delta", "recovery", "predictive", "baselines",
                          "solver_diagnostics", "wall_clock", "seed", "one_error_variant"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(WriteReport, CsvTables) {
  const fs::path dir = scratch_dir("tables");
  write_report(small_experiment(2), (dir / "out").string(), ReportFormat::CsvTables);
  for (const char* name : {"recovery.csv", "predictive.csv"}) {
    std::istringstream in(slurp(dir / "out" / name));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      rows.push_back(cells);
    }
    // Header plus DLDL and baseline rows; each row has 4 values, 4 ranks and the average rank.
    ASSERT_EQ(rows.size(), 3u) << name;
    EXPECT_EQ(rows[0].size(), 10u);
    EXPECT_EQ(rows[1][0], "DLDL");
    EXPECT_EQ(rows[2][0], "baseline");
    for (std::size_t r = 1; r < 3; ++r) {
      EXPECT_EQ(rows[r].size(), 10u);
      for (std::size_t k = 1; k < 10; ++k) EXPECT_NO_THROW((void)std::stod(rows[r][k]));
    }
  }
}

TEST(WriteReport, MetricTableShape) {
  MetricReport a, b;
  a.chebyshev = 0.1;
  b.chebyshev = 0.2;
  const std::string table = format_metric_table({{"x", a}, {"y", b}});
  EXPECT_EQ(table.substr(0, table.find('\n')),
            "method,chebyshev,chebyshev_rank,clark,clark_rank,one_error,one_error_rank,intersection,"
            "intersection_rank,avg_rank");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
}

TEST(WriteReport, EmptyPathIsIoError) {
  EXPECT_DLDL_ERROR(write_report(ExperimentReport{}, "", ReportFormat::StructuredText), ErrorCode::IoError);
  EXPECT_DLDL_ERROR(read_report("/nonexistent/dir/report.json"), ErrorCode::IoError);
}

TEST(HyperParamsJson, RoundTripAndPartialConfigs) {
  HyperParams p;
  p.alpha = 0.25;
  p.sigma = 1.5;
  p.seed = 9;
  EXPECT_EQ(hyperparams_from_json(to_json(p)), p);
  const HyperParams partial = hyperparams_from_json(Json::parse(R"({"beta": 3, "sigma": "auto"})"));
  EXPECT_EQ(partial.beta, 3.0);
  EXPECT_FALSE(partial.sigma);
  EXPECT_EQ(partial.alpha, HyperParams{}.alpha);
  EXPECT_DLDL_ERROR(hyperparams_from_json(Json::parse(R"({"lambda": 1})")), ErrorCode::ParseError);
  EXPECT_DLDL_ERROR(hyperparams_from_json(Json::parse(R"({"alpha": "x"})")), ErrorCode::ParseError);
}
