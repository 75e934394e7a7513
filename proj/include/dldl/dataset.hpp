#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dldl/core.hpp"

namespace dldl {

/// Features with ground-truth distributions, logical labels, or both.
struct LdlDataset {
  std::string name;
  FeatureMatrix X;
  std::optional<Matrix> D_true;
  std::optional<LogicalLabelMatrix> Y;

  Eigen::Index samples() const { return X.samples(); }
};

enum class CsvFormat {
  LabelDistribution,  // header f0..f{m-1},d0..d{c-1}
  Logical,            // header f0..f{m-1},y0..y{c-1}
};

/// Reads a csv-ld or csv-logical file. Distribution rows must sum to 1 within
/// 1e-4 and are then renormalized.
LdlDataset load_dataset(const std::string& path, CsvFormat format);
/// Picks the format from the first label column name.
LdlDataset load_dataset(const std::string& path);
LdlDataset parse_dataset(const std::string& text, CsvFormat format, const std::string& name);

/// Writes X with D_true (csv-ld) or Y (csv-logical); shortest round-trip decimals.
void write_dataset(const LdlDataset& data, const std::string& path, CsvFormat format);
std::string format_dataset(const LdlDataset& data, CsvFormat format);

/// Y_ij = 1 iff D_ij > delta.
LogicalLabelMatrix binarize(const Matrix& D_true, double delta);

struct SplitSpec {
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  std::uint64_t seed = 0;
};

struct Split {
  LdlDataset train;
  LdlDataset val;
  LdlDataset test;
  std::vector<Eigen::Index> train_idx, val_idx, test_idx;
};

/// Seeded shuffle, then contiguous partition of sizes floor(0.6n), floor(0.2n) and the rest.
Split split(const LdlDataset& data, const SplitSpec& spec);

LdlDataset subset(const LdlDataset& data, const std::vector<Eigen::Index>& rows,
                  const std::string& name);

struct SynthSpec {
  int n = 200;
  int m = 10;
  int c = 5;
  int n_clusters = 5;
  double temperature = 1.0;
  double sparsify_delta = 0.01;
  std::uint64_t seed = 0;
};

/// Clustered features with D_true = softmax(X W* / temperature), optionally
/// sparsified below sparsify_delta and renormalized.
LdlDataset synth_dataset(const SynthSpec& spec);

}  // namespace dldl
