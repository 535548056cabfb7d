#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csam/types.hpp"

namespace csam {

// How the label column encodes the two classes.
enum class LabelEncoding {
  zero_one,        // 0 -> -1, 1 -> +1
  plus_minus_one,  // -1 -> -1, +1 -> +1
};

// A loaded sample with row identifiers (from the id column when present,
// otherwise the 0-based data-row index as text).
struct Dataset {
  FeatureMatrix features;
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
};

struct CsvOptions {
  std::string label_column = "label";
  LabelEncoding encoding = LabelEncoding::zero_one;
  std::string id_column;  // empty: rows are numbered
};

// One skipped data row and why it was skipped.
struct RowRejection {
  std::size_t row = 0;  // 0-based data-row index (header excluded)
  std::string column;
  std::string value;
  std::string reason;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::vector<RowRejection> rejections;
};

// Delimited text with a header row; the delimiter (comma or tab) is chosen
// by inspecting the header. Cells that fail to parse or are non-finite, and
// labels outside the declared encoding, reject the whole row with a
// diagnostic rather than aborting the load. Hard errors: unreadable or
// empty file, missing label/id column (named along with the available
// columns), no feature columns, and zero usable rows.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options,
                 LoadReport* report = nullptr);

// Feature-only variant for scoring unlabeled data: every column except the
// listed ones is a feature. A file with a header but no data rows yields an
// empty matrix.
struct MatrixCsv {
  Matrix values;
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
};

MatrixCsv load_matrix_csv(const std::filesystem::path& path,
                          const std::vector<std::string>& drop_columns = {},
                          const std::string& id_column = {},
                          LoadReport* report = nullptr);

// Labels-plus-ids variant for evaluation truth files.
struct LabeledIds {
  std::vector<std::string> ids;
  Vector labels;
};

LabeledIds load_labels_csv(const std::filesystem::path& path,
                           const CsvOptions& options,
                           LoadReport* report = nullptr);

// Writes a dataset back out as comma-separated text (feature columns in
// order, then the label column encoded as -1/+1).
void write_csv(const Dataset& data, const std::filesystem::path& path);

// Fractions must be non-negative and sum to at most 1 (within 1e-12).
struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Deterministic shuffled partition: rows are shuffled by the seed, then
// assigned floor(fraction * n) rows per part in train/val/test order; when
// the fractions sum to 1 the remainder is handed out one row at a time in
// that same order, otherwise leftover rows are dropped.
Split split_dataset(const Dataset& data, const SplitFractions& fractions,
                    std::uint64_t seed);

// Shape of one informative coordinate: amplitude * sin(2*pi*frequency*x).
struct ComponentShape {
  double amplitude = 1.0;
  double frequency = 1.0;
};

struct SyntheticSpec {
  Index n = 500;
  Index p = 20;
  std::vector<Index> support;          // informative feature indices
  std::vector<ComponentShape> shapes;  // one per support entry
  double flip_rate = 0.05;             // label noise probability
  std::uint64_t seed = 0;

  void validate() const;
};

// Everything needed to audit a generated sample.
struct SyntheticTruth {
  std::vector<Index> support;
  std::vector<ComponentShape> shapes;
  double threshold = 0.0;  // median of the latent scores
  Vector latent;           // per-row latent score before thresholding
  std::vector<bool> flipped;
};

// Draws x uniformly from [0,1]^p, forms the additive latent score over the
// support, labels rows by the sign of (latent - median) with sign(0) = +1,
// then flips each label independently with the given probability.
Dataset generate_synthetic(const SyntheticSpec& spec,
                           SyntheticTruth* truth = nullptr);

}  // namespace csam
