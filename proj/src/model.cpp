#include "csam/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "csam/format.hpp"

namespace csam {

namespace {
constexpr long long kFormatVersion = 1;
constexpr std::string_view kMagic = "csam-model";
}  // namespace

TrainedModel::TrainedModel(BasisConfig basis, NormalizationStats stats,
                           Vector coef, SolverConfig solver,
                           ModelMetadata metadata)
    : basis_(basis),
      stats_(std::move(stats)),
      coef_(std::move(coef)),
      solver_(std::move(solver)),
      metadata_(metadata) {
  basis_.validate();
  const Index p = stats_.num_features();
  if (p < 1) throw DimensionError("model must cover at least one feature");
  if (stats_.max.size() != p)
    throw DimensionError("normalization stats min/max lengths differ");
  if (coef_.size() != p * basis_.dimension)
    throw DimensionError("coefficient length " + std::to_string(coef_.size()) +
                         " does not equal features x basis dimension " +
                         std::to_string(p * basis_.dimension));
  if (!coef_.allFinite())
    throw DataError("model coefficients contain non-finite values");
  for (Index j = 0; j < p; ++j) {
    if (!std::isfinite(stats_.min[j]) || !std::isfinite(stats_.max[j]) ||
        stats_.min[j] > stats_.max[j])
      throw DataError("normalization stats for feature " + std::to_string(j) +
                      " are invalid");
  }
}

TrainedModel TrainedModel::train(const FeatureMatrix& data,
                                 const BasisConfig& basis,
                                 const SolverConfig& config,
                                 SolverTrace* trace_out) {
  FitResult res = fit(data, basis, config);
  if (trace_out) *trace_out = res.trace;
  ModelMetadata meta;
  meta.train_rows = data.n();
  meta.seed = config.seed;
  meta.converged = res.trace.converged;
  return TrainedModel(res.basis, std::move(res.stats), std::move(res.coef),
                      config, meta);
}

double TrainedModel::predict_score(const Eigen::Ref<const Vector>& x) const {
  const Index p = num_features();
  const Index d = basis_.dimension;
  if (x.size() != p)
    throw DimensionError("expected " + std::to_string(p) +
                         " features, got " + std::to_string(x.size()));
  double score = 0.0;
  for (Index j = 0; j < p; ++j) {
    const double z = normalize_value(x[j], stats_.min[j], stats_.max[j]);
    score += basis_eval(basis_, z).dot(coef_.segment(j * d, d));
  }
  return score;
}

int TrainedModel::predict_label(const Eigen::Ref<const Vector>& x) const {
  return predict_score(x) >= 0.0 ? 1 : -1;
}

Vector TrainedModel::scores(const Eigen::Ref<const Matrix>& X) const {
  Vector out(X.rows());
  for (Index i = 0; i < X.rows(); ++i)
    out[i] = predict_score(X.row(i).transpose());
  return out;
}

std::vector<int> TrainedModel::labels(const Eigen::Ref<const Matrix>& X) const {
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i)
    out[static_cast<std::size_t>(i)] = predict_label(X.row(i).transpose());
  return out;
}

Vector TrainedModel::feature_group_norms() const {
  return group_norms(coef_, basis_.dimension, solver_.q);
}

std::vector<Index> TrainedModel::select_features(double tau) const {
  if (!(tau >= 0.0))
    throw ConfigError("tau must be non-negative, got " + std::to_string(tau));
  const Vector norms = feature_group_norms();
  const double largest = norms.maxCoeff();
  std::vector<Index> retained;
  if (largest == 0.0) return retained;
  for (Index j = 0; j < norms.size(); ++j)
    if (norms[j] > tau * largest) retained.push_back(j);
  std::sort(retained.begin(), retained.end(), [&](Index a, Index b) {
    if (norms[a] != norms[b]) return norms[a] > norms[b];
    return a < b;
  });
  return retained;
}

std::vector<std::pair<double, double>> TrainedModel::component_curve(
    Index j, Index grid_size) const {
  if (j < 0 || j >= num_features())
    throw DimensionError("feature index " + std::to_string(j) +
                         " is out of range for " +
                         std::to_string(num_features()) + " features");
  if (grid_size < 2)
    throw ConfigError("curve grid size must be at least 2, got " +
                      std::to_string(grid_size));
  const Index d = basis_.dimension;
  const double lo = stats_.min[j];
  const double hi = stats_.max[j];
  std::vector<std::pair<double, double>> curve;
  curve.reserve(static_cast<std::size_t>(grid_size));
  for (Index k = 0; k < grid_size; ++k) {
    const double x =
        lo + (hi - lo) * static_cast<double>(k) /
                 static_cast<double>(grid_size - 1);
    const double z = normalize_value(x, lo, hi);
    curve.emplace_back(x, basis_eval(basis_, z).dot(coef_.segment(j * d, d)));
  }
  return curve;
}

namespace {

void write_vector(std::ostream& os, const char* key, const Vector& v) {
  os << key;
  for (Index i = 0; i < v.size(); ++i) os << ' ' << format_double(v[i]);
  os << '\n';
}

// Sequential line/token reader that tracks byte offsets for error reporting.
class DocumentReader {
 public:
  explicit DocumentReader(std::string text) : text_(std::move(text)) {}

  // Next line split into whitespace-separated tokens. Reports truncation
  // when the document is exhausted.
  std::vector<std::string_view> line() {
    if (pos_ >= text_.size()) throw ModelTruncatedError(text_.size());
    line_start_ = pos_;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string::npos) end = text_.size();
    std::string_view raw(text_.data() + pos_, end - pos_);
    pos_ = end < text_.size() ? end + 1 : end;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && raw[i] == ' ') ++i;
      std::size_t start = i;
      while (i < raw.size() && raw[i] != ' ') ++i;
      if (i > start) tokens.push_back(raw.substr(start, i - start));
    }
    return tokens;
  }

  std::size_t line_start() const { return line_start_; }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
};

// A `key v1 v2 ...` line with exactly `count` numeric values.
Vector expect_vector(DocumentReader& reader, std::string_view key,
                     Index count) {
  const auto tokens = reader.line();
  if (tokens.empty() || tokens[0] != key)
    throw ModelParseError("expected field '" + std::string(key) + "'",
                          reader.line_start());
  if (static_cast<Index>(tokens.size()) - 1 != count)
    throw ModelParseError("field '" + std::string(key) + "' expects " +
                              std::to_string(count) + " values, found " +
                              std::to_string(tokens.size() - 1),
                          reader.line_start());
  Vector v(count);
  for (Index i = 0; i < count; ++i) {
    if (!parse_double(tokens[static_cast<std::size_t>(i) + 1], v[i]))
      throw ModelParseError("field '" + std::string(key) +
                                "' holds a malformed number",
                            reader.line_start());
  }
  return v;
}

double expect_scalar(DocumentReader& reader, std::string_view key) {
  return expect_vector(reader, key, 1)[0];
}

long long expect_integer(DocumentReader& reader, std::string_view key) {
  const auto tokens = reader.line();
  if (tokens.size() != 2 || tokens[0] != key)
    throw ModelParseError("expected field '" + std::string(key) + "'",
                          reader.line_start());
  long long value = 0;
  if (!parse_long(tokens[1], value))
    throw ModelParseError("field '" + std::string(key) +
                              "' holds a malformed integer",
                          reader.line_start());
  return value;
}

std::string expect_word(DocumentReader& reader, std::string_view key) {
  const auto tokens = reader.line();
  if (tokens.size() != 2 || tokens[0] != key)
    throw ModelParseError("expected field '" + std::string(key) + "'",
                          reader.line_start());
  return std::string(tokens[1]);
}

}  // namespace

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");

  const Index p = num_features();
  os << kMagic << ' ' << kFormatVersion << '\n';
  os << "family "
     << (basis_.family == BasisFamily::bspline ? "bspline" : "trig") << '\n';
  os << "basis_dim " << basis_.dimension << '\n';
  os << "spline_order " << basis_.spline_order << '\n';
  os << "features " << p << '\n';
  os << "lambda " << format_double(solver_.lambda) << '\n';
  os << "sigma " << format_double(solver_.sigma) << '\n';
  os << "q " << static_cast<int>(solver_.q) << '\n';
  os << "eta " << format_double(solver_.eta) << '\n';
  os << "epsilon " << format_double(solver_.epsilon) << '\n';
  os << "outer_max_iter " << solver_.outer_max_iter << '\n';
  os << "inner_max_iter " << solver_.inner_max_iter << '\n';
  os << "warm_start " << (solver_.warm_start ? 1 : 0) << '\n';
  write_vector(os, "feature_weights", solver_.resolved_weights(p));
  os << "seed " << metadata_.seed << '\n';
  os << "train_rows " << metadata_.train_rows << '\n';
  os << "converged " << (metadata_.converged ? 1 : 0) << '\n';
  write_vector(os, "min", stats_.min);
  write_vector(os, "max", stats_.max);
  write_vector(os, "coefficients", coef_);
  os << "end\n";
  if (!os) throw IoError("failed while writing " + path.string());
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  DocumentReader reader(std::move(buffer).str());

  const auto header = reader.line();
  if (header.size() != 2 || header[0] != kMagic)
    throw ModelParseError("missing '" + std::string(kMagic) + "' header",
                          reader.line_start());
  long long version = 0;
  if (!parse_long(header[1], version))
    throw ModelParseError("malformed format version", reader.line_start());
  if (version != kFormatVersion)
    throw ModelVersionError(version, kFormatVersion);

  BasisConfig basis;
  const std::string family = expect_word(reader, "family");
  if (family == "bspline")
    basis.family = BasisFamily::bspline;
  else if (family == "trig")
    basis.family = BasisFamily::trig;
  else
    throw ModelParseError("unknown basis family '" + family + "'",
                          reader.line_start());
  basis.dimension = expect_integer(reader, "basis_dim");
  basis.spline_order = expect_integer(reader, "spline_order");

  const long long p = expect_integer(reader, "features");
  if (p < 1)
    throw ModelParseError("feature count must be positive",
                          reader.line_start());

  SolverConfig solver;
  solver.lambda = expect_scalar(reader, "lambda");
  solver.sigma = expect_scalar(reader, "sigma");
  solver.q = penalty_norm_from_int(
      static_cast<int>(expect_integer(reader, "q")));
  solver.eta = expect_scalar(reader, "eta");
  solver.epsilon = expect_scalar(reader, "epsilon");
  solver.outer_max_iter =
      static_cast<int>(expect_integer(reader, "outer_max_iter"));
  solver.inner_max_iter =
      static_cast<int>(expect_integer(reader, "inner_max_iter"));
  solver.warm_start = expect_integer(reader, "warm_start") != 0;
  solver.feature_weights = expect_vector(reader, "feature_weights", p);

  ModelMetadata meta;
  meta.seed = static_cast<std::uint64_t>(expect_integer(reader, "seed"));
  meta.train_rows = expect_integer(reader, "train_rows");
  meta.converged = expect_integer(reader, "converged") != 0;

  NormalizationStats stats;
  stats.min = expect_vector(reader, "min", p);
  stats.max = expect_vector(reader, "max", p);
  Vector coef = expect_vector(reader, "coefficients", p * basis.dimension);

  const auto tail = reader.line();
  if (tail.size() != 1 || tail[0] != "end")
    throw ModelParseError("expected closing 'end' marker",
                          reader.line_start());

  try {
    return TrainedModel(basis, std::move(stats), std::move(coef), solver,
                        meta);
  } catch (const Error& e) {
    throw ModelParseError(std::string("model document is inconsistent: ") +
                              e.what(),
                          0);
  }
}

}  // namespace csam
