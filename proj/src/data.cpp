#include "csam/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string_view>

#include "csam/format.hpp"
#include "csam/rng.hpp"

namespace csam {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return std::move(buffer).str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  // Strip a UTF-8 byte-order mark if present.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  // A trailing newline does not create a phantom empty row.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_cells(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find(delim, pos);
    if (end == std::string_view::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return cells;
}

char detect_delimiter(std::string_view header) {
  return header.find('\t') != std::string_view::npos ? '\t' : ',';
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& name : names) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

// Column positions shared by the three CSV loaders.
struct TableLayout {
  char delimiter = ',';
  std::vector<std::string> column_names;
  std::vector<std::size_t> feature_cells;  // cell index per feature column
  std::vector<std::string> feature_names;
  std::ptrdiff_t label_cell = -1;
  std::ptrdiff_t id_cell = -1;
};

TableLayout parse_header(const std::vector<std::string_view>& lines,
                         const std::filesystem::path& path,
                         const std::string& label_column,
                         const std::string& id_column,
                         const std::vector<std::string>& drop_columns) {
  if (lines.empty()) throw DataError("file " + path.string() + " is empty");
  TableLayout layout;
  layout.delimiter = detect_delimiter(lines[0]);
  const auto header = split_cells(lines[0], layout.delimiter);
  for (const auto& cell : header) layout.column_names.emplace_back(cell);

  for (std::size_t c = 0; c < layout.column_names.size(); ++c) {
    const std::string& name = layout.column_names[c];
    if (!label_column.empty() && name == label_column) {
      layout.label_cell = static_cast<std::ptrdiff_t>(c);
      continue;
    }
    if (!id_column.empty() && name == id_column) {
      layout.id_cell = static_cast<std::ptrdiff_t>(c);
      continue;
    }
    if (std::find(drop_columns.begin(), drop_columns.end(), name) !=
        drop_columns.end())
      continue;
    layout.feature_cells.push_back(c);
    layout.feature_names.push_back(name);
  }

  if (!label_column.empty() && layout.label_cell < 0)
    throw DataError("file " + path.string() + " has no column '" +
                    label_column + "'; available columns: " +
                    join_names(layout.column_names));
  if (!id_column.empty() && layout.id_cell < 0)
    throw DataError("file " + path.string() + " has no column '" + id_column +
                    "'; available columns: " +
                    join_names(layout.column_names));
  return layout;
}

// One pass over the data rows; invalid rows are recorded and skipped.
struct ParsedRows {
  std::vector<std::vector<double>> features;
  std::vector<double> labels;
  std::vector<std::string> ids;
};

bool parse_label(double raw, LabelEncoding encoding, double& out) {
  if (encoding == LabelEncoding::zero_one) {
    if (raw == 0.0) { out = -1.0; return true; }
    if (raw == 1.0) { out = 1.0; return true; }
    return false;
  }
  if (raw == -1.0 || raw == 1.0) { out = raw; return true; }
  return false;
}

ParsedRows parse_rows(const std::vector<std::string_view>& lines,
                      const TableLayout& layout, LabelEncoding encoding,
                      LoadReport* report) {
  ParsedRows rows;
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = LoadReport{};

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t row_index = r - 1;
    ++rep.rows_read;
    const auto cells = split_cells(lines[r], layout.delimiter);
    if (cells.size() != layout.column_names.size()) {
      rep.rejections.push_back({row_index, "", std::string(lines[r]),
                                "expected " +
                                    std::to_string(layout.column_names.size()) +
                                    " cells, found " +
                                    std::to_string(cells.size())});
      continue;
    }

    std::vector<double> feature_row(layout.feature_cells.size());
    bool ok = true;
    for (std::size_t f = 0; f < layout.feature_cells.size(); ++f) {
      const std::string_view cell = cells[layout.feature_cells[f]];
      double value = 0.0;
      if (!parse_double(cell, value)) {
        rep.rejections.push_back({row_index, layout.feature_names[f],
                                  std::string(cell), "unparseable number"});
        ok = false;
        break;
      }
      if (!std::isfinite(value)) {
        rep.rejections.push_back({row_index, layout.feature_names[f],
                                  std::string(cell), "non-finite value"});
        ok = false;
        break;
      }
      feature_row[f] = value;
    }
    if (!ok) continue;

    double label = 0.0;
    if (layout.label_cell >= 0) {
      const std::string_view cell =
          cells[static_cast<std::size_t>(layout.label_cell)];
      double raw = 0.0;
      if (!parse_double(cell, raw) || !parse_label(raw, encoding, label)) {
        rep.rejections.push_back(
            {row_index, layout.column_names[
                            static_cast<std::size_t>(layout.label_cell)],
             std::string(cell),
             encoding == LabelEncoding::zero_one
                 ? "label is not 0 or 1"
                 : "label is not -1 or +1"});
        continue;
      }
    }

    rows.features.push_back(std::move(feature_row));
    rows.labels.push_back(label);
    rows.ids.push_back(layout.id_cell >= 0
                           ? std::string(cells[static_cast<std::size_t>(
                                 layout.id_cell)])
                           : std::to_string(row_index));
    ++rep.rows_kept;
  }
  return rows;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows,
                      std::size_t cols) {
  Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return values;
}

Dataset subset(const Dataset& data, const std::vector<Index>& rows) {
  Dataset out;
  out.feature_names = data.feature_names;
  out.features.values.resize(static_cast<Index>(rows.size()),
                             data.features.p());
  out.features.labels.resize(static_cast<Index>(rows.size()));
  out.ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.values.row(static_cast<Index>(i)) =
        data.features.values.row(rows[i]);
    out.features.labels[static_cast<Index>(i)] = data.features.labels[rows[i]];
    out.ids.push_back(data.ids[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options,
                 LoadReport* report) {
  if (options.label_column.empty())
    throw ConfigError("label column name must not be empty");
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  const TableLayout layout =
      parse_header(lines, path, options.label_column, options.id_column, {});
  if (layout.feature_cells.empty())
    throw DataError("file " + path.string() +
                    " has no feature columns besides '" +
                    options.label_column + "'");
  ParsedRows rows = parse_rows(lines, layout, options.encoding, report);
  if (rows.features.empty())
    throw DataError("file " + path.string() + " contains no usable data rows");

  Dataset data;
  data.feature_names = layout.feature_names;
  data.ids = std::move(rows.ids);
  data.features.values =
      rows_to_matrix(rows.features, layout.feature_cells.size());
  data.features.labels =
      Eigen::Map<const Vector>(rows.labels.data(),
                               static_cast<Index>(rows.labels.size()));
  return data;
}

MatrixCsv load_matrix_csv(const std::filesystem::path& path,
                          const std::vector<std::string>& drop_columns,
                          const std::string& id_column, LoadReport* report) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  const TableLayout layout =
      parse_header(lines, path, "", id_column, drop_columns);
  if (layout.feature_cells.empty())
    throw DataError("file " + path.string() + " has no feature columns");
  ParsedRows rows =
      parse_rows(lines, layout, LabelEncoding::zero_one, report);

  MatrixCsv out;
  out.feature_names = layout.feature_names;
  out.ids = std::move(rows.ids);
  out.values = rows_to_matrix(rows.features, layout.feature_cells.size());
  return out;
}

LabeledIds load_labels_csv(const std::filesystem::path& path,
                           const CsvOptions& options, LoadReport* report) {
  if (options.label_column.empty())
    throw ConfigError("label column name must not be empty");
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  TableLayout layout =
      parse_header(lines, path, options.label_column, options.id_column, {});
  // Ignore every other column: labels and ids only.
  layout.feature_cells.clear();
  layout.feature_names.clear();
  ParsedRows rows = parse_rows(lines, layout, options.encoding, report);
  if (rows.labels.empty())
    throw DataError("file " + path.string() + " contains no usable data rows");

  LabeledIds out;
  out.ids = std::move(rows.ids);
  out.labels = Eigen::Map<const Vector>(rows.labels.data(),
                                        static_cast<Index>(rows.labels.size()));
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  const Index p = data.features.p();
  for (Index j = 0; j < p; ++j) {
    if (j > 0) os << ',';
    os << (static_cast<std::size_t>(j) < data.feature_names.size()
               ? data.feature_names[static_cast<std::size_t>(j)]
               : "f" + std::to_string(j));
  }
  os << ",label\n";
  for (Index i = 0; i < data.features.n(); ++i) {
    for (Index j = 0; j < p; ++j) {
      if (j > 0) os << ',';
      os << format_double(data.features.values(i, j));
    }
    os << ',' << format_double(data.features.labels[i]) << '\n';
  }
  if (!os) throw IoError("failed while writing " + path.string());
}

Split split_dataset(const Dataset& data, const SplitFractions& fractions,
                    std::uint64_t seed) {
  const double fs[3] = {fractions.train, fractions.val, fractions.test};
  double total = 0.0;
  for (double f : fs) {
    if (!(f >= 0.0))
      throw ConfigError("split fractions must be non-negative");
    total += f;
  }
  if (total > 1.0 + 1e-12)
    throw ConfigError("split fractions sum to " + std::to_string(total) +
                      ", which exceeds 1");

  const Index n = data.features.n();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(
        rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }

  // floor(f*n) per part; a tiny nudge guards against 0.8*10 rounding below 8.
  Index counts[3];
  Index assigned = 0;
  for (int k = 0; k < 3; ++k) {
    counts[k] = static_cast<Index>(
        std::floor(fs[k] * static_cast<double>(n) + 1e-9));
    assigned += counts[k];
  }
  if (total >= 1.0 - 1e-12) {
    Index leftover = n - assigned;
    for (int k = 0; leftover > 0; k = (k + 1) % 3) {
      ++counts[k];
      --leftover;
    }
  }

  Split out;
  Index offset = 0;
  Dataset* parts[3] = {&out.train, &out.val, &out.test};
  for (int k = 0; k < 3; ++k) {
    std::vector<Index> rows(order.begin() + offset,
                            order.begin() + offset + counts[k]);
    *parts[k] = subset(data, rows);
    offset += counts[k];
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (n < 1 || p < 1)
    throw ConfigError("synthetic sample needs n >= 1 and p >= 1");
  if (support.size() != shapes.size())
    throw ConfigError("support and shapes must have the same length");
  if (!(flip_rate >= 0.0 && flip_rate < 0.5))
    throw ConfigError("flip rate must lie in [0, 0.5), got " +
                      std::to_string(flip_rate));
  std::vector<Index> sorted = support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("support indices must be distinct");
  for (Index j : support)
    if (j < 0 || j >= p)
      throw ConfigError("support index " + std::to_string(j) +
                        " is out of range for p = " + std::to_string(p));
  for (const auto& shape : shapes)
    if (!std::isfinite(shape.amplitude) || !std::isfinite(shape.frequency))
      throw ConfigError("component shapes must be finite");
}

Dataset generate_synthetic(const SyntheticSpec& spec, SyntheticTruth* truth) {
  spec.validate();
  Rng rng(spec.seed);

  Dataset data;
  data.features.values.resize(spec.n, spec.p);
  for (Index i = 0; i < spec.n; ++i)
    for (Index j = 0; j < spec.p; ++j)
      data.features.values(i, j) = rng.uniform();

  Vector latent = Vector::Zero(spec.n);
  for (std::size_t s = 0; s < spec.support.size(); ++s) {
    const Index j = spec.support[s];
    const ComponentShape& shape = spec.shapes[s];
    for (Index i = 0; i < spec.n; ++i)
      latent[i] += shape.amplitude *
                   std::sin(2.0 * std::numbers::pi * shape.frequency *
                            data.features.values(i, j));
  }

  std::vector<double> sorted(latent.data(), latent.data() + latent.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t half = sorted.size() / 2;
  const double median = sorted.size() % 2 == 1
                            ? sorted[half]
                            : 0.5 * (sorted[half - 1] + sorted[half]);

  data.features.labels.resize(spec.n);
  std::vector<bool> flipped(static_cast<std::size_t>(spec.n), false);
  for (Index i = 0; i < spec.n; ++i)
    data.features.labels[i] = latent[i] - median >= 0.0 ? 1.0 : -1.0;
  for (Index i = 0; i < spec.n; ++i) {
    if (rng.uniform() < spec.flip_rate) {
      data.features.labels[i] = -data.features.labels[i];
      flipped[static_cast<std::size_t>(i)] = true;
    }
  }

  data.ids.reserve(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) data.ids.push_back(std::to_string(i));
  data.feature_names.reserve(static_cast<std::size_t>(spec.p));
  for (Index j = 0; j < spec.p; ++j)
    data.feature_names.push_back("f" + std::to_string(j));

  if (truth) {
    truth->support = spec.support;
    truth->shapes = spec.shapes;
    truth->threshold = median;
    truth->latent = std::move(latent);
    truth->flipped = std::move(flipped);
  }
  return data;
}

}  // namespace csam
