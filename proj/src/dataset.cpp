#include "dldl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace dldl {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view field, double& value) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

// Column names must read prefix0, prefix1, ... in order.
bool numbered(std::string_view name, char prefix, std::size_t expected) {
  if (name.size() < 2 || name.front() != prefix) return false;
  std::size_t value = 0;
  const auto* end = name.data() + name.size();
  const auto [ptr, ec] = std::from_chars(name.data() + 1, end, value);
  return ec == std::errc() && ptr == end && value == expected;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.rfind('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

LdlDataset parse_dataset(const std::string& text, CsvFormat format, const std::string& name) {
  const char label_prefix = format == CsvFormat::LabelDistribution ? 'd' : 'y';
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  std::size_t m = 0;
  std::size_t c = 0;
  bool have_header = false;
  std::vector<std::vector<double>> features;
  std::vector<std::vector<double>> labels;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      while (m < fields.size() && numbered(fields[m], 'f', m)) ++m;
      while (m + c < fields.size() && numbered(fields[m + c], label_prefix, c)) ++c;
      if (m == 0 || c < 2 || m + c != fields.size()) {
        throw Error(ErrorCode::HeaderMismatch,
                    std::string("expected f0..f{m-1},") + label_prefix + "0.." + label_prefix +
                        "{c-1} with c >= 2",
                    line_no);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != m + c) {
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(m + c) + " fields, got " + std::to_string(fields.size()),
                  line_no);
    }
    std::vector<double> row(m + c);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!parse_double(fields[j], row[j])) {
        throw Error(ErrorCode::ParseError, "bad number '" + std::string(fields[j]) + "'", line_no);
      }
    }
    std::vector<double> lab(row.begin() + static_cast<std::ptrdiff_t>(m), row.end());
    row.resize(m);
    if (format == CsvFormat::LabelDistribution) {
      double sum = 0.0;
      for (double v : lab) {
        if (v < 0.0) throw Error(ErrorCode::RowSumViolation, "negative degree", line_no);
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-4) {
        throw Error(ErrorCode::RowSumViolation, "degrees sum to " + format_double(sum), line_no);
      }
      for (double& v : lab) v /= sum;
    } else {
      bool any = false;
      for (double v : lab) {
        if (v != 0.0 && v != 1.0) throw Error(ErrorCode::ParseError, "label must be 0 or 1", line_no);
        any = any || v == 1.0;
      }
      if (!any) throw Error(ErrorCode::AllZeroLabelRow, "no positive label", line_no);
    }
    features.push_back(std::move(row));
    labels.push_back(std::move(lab));
  }
  if (!have_header) throw Error(ErrorCode::HeaderMismatch, "missing header");

  const auto n = static_cast<Eigen::Index>(features.size());
  Matrix X(n, static_cast<Eigen::Index>(m));
  Matrix L(n, static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = features[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < L.cols(); ++j) L(i, j) = labels[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  LdlDataset out{name, FeatureMatrix(std::move(X)), std::nullopt, std::nullopt};
  if (format == CsvFormat::LabelDistribution) {
    out.D_true = std::move(L);
  } else {
    out.Y = LogicalLabelMatrix(L.cast<std::uint8_t>());
  }
  return out;
}

LdlDataset load_dataset(const std::string& path, CsvFormat format) {
  return parse_dataset(read_file(path), format, stem_of(path));
}

LdlDataset load_dataset(const std::string& path) {
  const std::string text = read_file(path);
  const auto first_line = text.substr(0, text.find('\n'));
  const auto fields = split_fields(first_line);
  CsvFormat format = CsvFormat::LabelDistribution;
  for (auto f : fields) {
    if (!f.empty() && f.front() == 'y') format = CsvFormat::Logical;
  }
  return parse_dataset(text, format, stem_of(path));
}

std::string format_dataset(const LdlDataset& data, CsvFormat format) {
  const Matrix& X = data.X.values();
  const bool ld = format == CsvFormat::LabelDistribution;
  if (ld && !data.D_true) throw Error(ErrorCode::PreconditionFailed, "dataset has no D_true");
  if (!ld && !data.Y) throw Error(ErrorCode::PreconditionFailed, "dataset has no logical labels");
  const Eigen::Index c = ld ? data.D_true->cols() : data.Y->labels();

  std::string out;
  for (Eigen::Index j = 0; j < X.cols(); ++j) out += (j ? ",f" : "f") + std::to_string(j);
  for (Eigen::Index j = 0; j < c; ++j) out += std::string(ld ? ",d" : ",y") + std::to_string(j);
  out += '\n';
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j) out += ',';
      out += format_double(X(i, j));
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      out += ',';
      out += ld ? format_double((*data.D_true)(i, j)) : std::to_string(int(data.Y->values()(i, j)));
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const LdlDataset& data, const std::string& path, CsvFormat format) {
  if (path.empty()) throw Error(ErrorCode::IoError, "empty output path");
  const std::string text = format_dataset(data, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

LogicalLabelMatrix binarize(const Matrix& D_true, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  }
  LabelMatrix Y(D_true.rows(), D_true.cols());
  for (Eigen::Index i = 0; i < D_true.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < D_true.cols(); ++j) {
      Y(i, j) = D_true(i, j) > delta ? 1 : 0;
      any = any || Y(i, j);
    }
    if (!any) {
      throw Error(ErrorCode::AllZeroLabelRow, "max degree <= delta", static_cast<std::size_t>(i));
    }
  }
  return LogicalLabelMatrix(std::move(Y));
}

LdlDataset subset(const LdlDataset& data, const std::vector<Eigen::Index>& rows,
                  const std::string& name) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix X(n, data.X.features());
  for (Eigen::Index i = 0; i < n; ++i) X.row(i) = data.X.values().row(rows[static_cast<std::size_t>(i)]);
  LdlDataset out{name, FeatureMatrix(std::move(X)), std::nullopt, std::nullopt};
  if (data.D_true) {
    Matrix D(n, data.D_true->cols());
    for (Eigen::Index i = 0; i < n; ++i) D.row(i) = data.D_true->row(rows[static_cast<std::size_t>(i)]);
    out.D_true = std::move(D);
  }
  if (data.Y) {
    LabelMatrix Y(n, data.Y->labels());
    for (Eigen::Index i = 0; i < n; ++i) Y.row(i) = data.Y->values().row(rows[static_cast<std::size_t>(i)]);
    out.Y = LogicalLabelMatrix(std::move(Y));
  }
  return out;
}

Split split(const LdlDataset& data, const SplitSpec& spec) {
  const Eigen::Index n = data.samples();
  if (n < 5) throw Error(ErrorCode::TooFewSamples, "split needs n >= 5, got " + std::to_string(n));
  if (std::abs(spec.train_frac + spec.val_frac + spec.test_frac - 1.0) > 1e-12 ||
      spec.train_frac <= 0 || spec.val_frac <= 0 || spec.test_frac <= 0) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must be positive and sum to 1");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_frac * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(spec.val_frac * static_cast<double>(n)));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= order.size()) {
    throw Error(ErrorCode::TooFewSamples, "a split partition would be empty");
  }
  Split out{data, data, data, {}, {}, {}};
  out.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                     order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  out.train = subset(data, out.train_idx, data.name + ".train");
  out.val = subset(data, out.val_idx, data.name + ".val");
  out.test = subset(data, out.test_idx, data.name + ".test");
  return out;
}

LdlDataset synth_dataset(const SynthSpec& spec) {
  if (spec.n < 2 || spec.m < 1 || spec.c < 2) {
    throw Error(ErrorCode::InvalidArgument, "synth needs n >= 2, m >= 1, c >= 2");
  }
  if (spec.n_clusters < 1 || spec.n_clusters > spec.n) {
    throw Error(ErrorCode::InvalidArgument, "n_clusters must lie in [1, n]");
  }
  if (!(spec.temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  if (!(spec.sparsify_delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sparsify_delta must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, spec.n_clusters - 1);

  Matrix centers(spec.n_clusters, spec.m);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = unit(rng);
  Matrix W_star(spec.m, spec.c);
  for (Eigen::Index i = 0; i < W_star.size(); ++i) W_star.data()[i] = gauss(rng);

  constexpr double kNoise = 0.1;
  constexpr int kMaxAttempts = 100;
  Matrix X(spec.n, spec.m);
  Matrix D(spec.n, spec.c);
  Eigen::RowVectorXd logits(spec.c);
  for (int i = 0; i < spec.n; ++i) {
    const int cluster = pick(rng);
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      for (int j = 0; j < spec.m; ++j) X(i, j) = centers(cluster, j) + kNoise * gauss(rng);
      logits = X.row(i) * W_star / spec.temperature;
      auto row = D.row(i);
      row.array() = (logits.array() - logits.maxCoeff()).exp();
      row /= row.sum();
      if (spec.sparsify_delta > 0.0) {
        for (int j = 0; j < spec.c; ++j) {
          if (row(j) < spec.sparsify_delta) row(j) = 0.0;
        }
        const double total = row.sum();
        if (total <= 0.0) continue;
        row /= total;
      }
      ok = true;
    }
    if (!ok) throw Error(ErrorCode::DegenerateRow, "resampling failed", static_cast<std::size_t>(i));
  }
  return LdlDataset{"synth-" + std::to_string(spec.seed), FeatureMatrix(std::move(X)),
                    std::move(D), std::nullopt};
}

}  // namespace dldl
