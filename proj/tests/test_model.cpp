#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "csam/data.hpp"
#include "csam/model.hpp"
#include "csam/rng.hpp"

using namespace csam;

namespace {

// Self-deleting scratch directory for serialization tests.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("csam-model-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path file(const std::string& name) const {
    return path / name;
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  REQUIRE(os.good());
  os << text;
}

NormalizationStats unit_stats(Index p) {
  NormalizationStats stats;
  stats.min = Vector::Zero(p);
  stats.max = Vector::Ones(p);
  return stats;
}

TrainedModel hand_model(const BasisConfig& basis, Index p, const Vector& coef,
                        PenaltyNorm q = PenaltyNorm::l2) {
  SolverConfig solver;
  solver.q = q;
  ModelMetadata meta;
  meta.train_rows = 1;
  return TrainedModel(basis, unit_stats(p), coef, solver, meta);
}

TrainedModel train_small(std::uint64_t seed = 11) {
  SyntheticSpec spec;
  spec.n = 120;
  spec.p = 3;
  spec.support = {0};
  spec.shapes = {{1.0, 1.0}};
  spec.seed = seed;
  const Dataset data = generate_synthetic(spec);
  BasisConfig basis;
  basis.dimension = 6;
  SolverConfig config;
  config.lambda = 0.01;
  config.seed = seed;
  return TrainedModel::train(data.features, basis, config);
}

}  // namespace

TEST_CASE("scores are additive across feature blocks") {
  BasisConfig basis;
  basis.family = BasisFamily::trig;
  basis.dimension = 3;
  Rng rng(1);
  const Vector coef = rng.uniform_vector(6, -1.0, 1.0);
  const TrainedModel full = hand_model(basis, 2, coef);
  Vector only0 = coef, only1 = coef;
  only0.segment(3, 3).setZero();
  only1.segment(0, 3).setZero();
  const TrainedModel first = hand_model(basis, 2, only0);
  const TrainedModel second = hand_model(basis, 2, only1);

  for (int t = 0; t < 50; ++t) {
    const Vector x = rng.uniform_vector(2);
    CHECK(full.predict_score(x) ==
          first.predict_score(x) + second.predict_score(x));
  }
}

TEST_CASE("scores agree with the flattened design expansion") {
  BasisConfig basis;  // default bspline, d = 8
  Rng rng(2);
  const Vector coef = rng.uniform_vector(24, -2.0, 2.0);
  const TrainedModel model = hand_model(basis, 3, coef);
  Matrix X(40, 3);
  for (Index i = 0; i < 40; ++i)
    for (Index j = 0; j < 3; ++j) X(i, j) = rng.uniform();
  const DesignMatrix design = expand(X, basis);  // stats are the identity map
  const Vector direct = design.phi * coef;
  const Vector scored = model.scores(X);
  CHECK((scored - direct).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("zero coefficients give score zero and the positive tie label") {
  BasisConfig basis;
  const TrainedModel model = hand_model(basis, 2, Vector::Zero(16));
  Vector x(2);
  x << 0.3, 0.9;
  CHECK(model.predict_score(x) == 0.0);
  CHECK(model.predict_label(x) == 1);
}

TEST_CASE("predict validates the input width") {
  BasisConfig basis;
  const TrainedModel model = hand_model(basis, 2, Vector::Zero(16));
  CHECK_THROWS_AS(model.predict_score(Vector::Zero(3)), DimensionError);
}

TEST_CASE("group norms follow the trained penalty norm") {
  BasisConfig basis;
  basis.family = BasisFamily::trig;
  basis.dimension = 2;
  Vector coef(6);
  coef << 3.0, 4.0, 0.0, 0.0, 1.0, -1.0;
  const TrainedModel l2 = hand_model(basis, 3, coef, PenaltyNorm::l2);
  CHECK(l2.feature_group_norms()[0] == doctest::Approx(5.0));
  CHECK(l2.feature_group_norms()[1] == 0.0);
  CHECK(l2.feature_group_norms()[2] ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const TrainedModel l1 = hand_model(basis, 3, coef, PenaltyNorm::l1);
  CHECK(l1.feature_group_norms()[0] == doctest::Approx(7.0));
}

TEST_CASE("select_features applies the relative threshold and ordering") {
  BasisConfig basis;
  basis.family = BasisFamily::trig;
  basis.dimension = 1;
  Vector coef(3);
  coef << 5.0, 0.0, 0.004;
  const TrainedModel model = hand_model(basis, 3, coef);
  // 0.004 is below 1e-3 * 5 = 0.005, so only feature 0 survives.
  const auto kept = model.select_features(1e-3);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == 0);
  // With tau = 0 any nonzero block survives, ordered by descending norm.
  const auto loose = model.select_features(0.0);
  REQUIRE(loose.size() == 2);
  CHECK(loose[0] == 0);
  CHECK(loose[1] == 2);

  Vector tied(3);
  tied << 2.0, 3.0, 2.0;
  const auto order = hand_model(basis, 3, tied).select_features(0.0);
  REQUIRE(order.size() == 3);
  CHECK(order[0] == 1);  // largest first
  CHECK(order[1] == 0);  // tie broken by ascending index
  CHECK(order[2] == 2);

  const TrainedModel zero = hand_model(basis, 3, Vector::Zero(3));
  CHECK(zero.select_features().empty());
  CHECK_THROWS_AS(model.select_features(-0.5), ConfigError);
}

TEST_CASE("component curve reproduces a pure cosine block") {
  BasisConfig basis;
  basis.family = BasisFamily::trig;
  basis.dimension = 3;  // 1, sqrt(2) cos(2 pi x), sqrt(2) sin(2 pi x)
  Vector coef(3);
  coef << 0.0, 1.0, 0.0;
  const TrainedModel model = hand_model(basis, 1, coef);
  const auto curve = model.component_curve(0, 101);
  REQUIRE(curve.size() == 101);
  CHECK(curve.front().first == 0.0);
  CHECK(curve.back().first == doctest::Approx(1.0).epsilon(1e-15));
  for (const auto& [x, value] : curve) {
    const double expected =
        std::sqrt(2.0) * std::cos(2.0 * std::acos(-1.0) * x);
    CHECK(value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("component curve spans the observed raw range") {
  BasisConfig basis;
  basis.family = BasisFamily::trig;
  basis.dimension = 3;
  NormalizationStats stats;
  stats.min = Vector::Constant(1, 2.0);
  stats.max = Vector::Constant(1, 4.0);
  Vector coef(3);
  coef << 0.0, 1.0, 0.0;
  SolverConfig solver;
  ModelMetadata meta;
  const TrainedModel model(basis, stats, coef, solver, meta);
  const auto curve = model.component_curve(0, 3);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].first == 2.0);
  CHECK(curve[1].first == 3.0);
  CHECK(curve[2].first == 4.0);
  // Raw midpoint 3 normalizes to 0.5: sqrt(2) * cos(pi) = -sqrt(2).
  CHECK(curve[1].second ==
        doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("component curve rejects bad arguments") {
  BasisConfig basis;
  const TrainedModel model = hand_model(basis, 2, Vector::Zero(16));
  CHECK_THROWS_AS(model.component_curve(2, 10), DimensionError);
  CHECK_THROWS_AS(model.component_curve(-1, 10), DimensionError);
  CHECK_THROWS_AS(model.component_curve(0, 1), ConfigError);
}

TEST_CASE("labels are invariant under positive rescaling of the score") {
  BasisConfig basis;
  Rng rng(3);
  const Vector coef = rng.uniform_vector(16, -1.0, 1.0);
  const TrainedModel model = hand_model(basis, 2, coef);
  const TrainedModel scaled = hand_model(basis, 2, (3.7 * coef).eval());
  for (int t = 0; t < 200; ++t) {
    const Vector x = rng.uniform_vector(2);
    CHECK(model.predict_label(x) == scaled.predict_label(x));
  }
}

TEST_CASE("constructor validates shape and values") {
  BasisConfig basis;
  SolverConfig solver;
  ModelMetadata meta;
  CHECK_THROWS_AS(
      TrainedModel(basis, unit_stats(2), Vector::Zero(15), solver, meta),
      DimensionError);
  NormalizationStats bad = unit_stats(2);
  bad.min[0] = 2.0;  // min above max
  CHECK_THROWS_AS(TrainedModel(basis, bad, Vector::Zero(16), solver, meta),
                  DataError);
  Vector nan_coef = Vector::Zero(16);
  nan_coef[3] = std::nan("");
  CHECK_THROWS_AS(
      TrainedModel(basis, unit_stats(2), nan_coef, solver, meta), DataError);
}

TEST_CASE("save and load round-trip every stored field bit-exactly") {
  TempDir dir;
  const TrainedModel model = train_small();
  const auto path = dir.file("model.txt");
  model.save(path);
  const TrainedModel back = TrainedModel::load(path);

  CHECK(back.basis().family == model.basis().family);
  CHECK(back.basis().dimension == model.basis().dimension);
  CHECK(back.basis().spline_order == model.basis().spline_order);
  CHECK(back.num_features() == model.num_features());
  REQUIRE(back.coefficients().size() == model.coefficients().size());
  CHECK((back.coefficients().array() == model.coefficients().array()).all());
  CHECK((back.stats().min.array() == model.stats().min.array()).all());
  CHECK((back.stats().max.array() == model.stats().max.array()).all());
  CHECK(back.solver().lambda == model.solver().lambda);
  CHECK(back.solver().sigma == model.solver().sigma);
  CHECK(back.solver().q == model.solver().q);
  CHECK(back.solver().eta == model.solver().eta);
  CHECK(back.solver().epsilon == model.solver().epsilon);
  CHECK(back.solver().outer_max_iter == model.solver().outer_max_iter);
  CHECK(back.solver().inner_max_iter == model.solver().inner_max_iter);
  CHECK(back.solver().warm_start == model.solver().warm_start);
  CHECK(back.metadata().seed == model.metadata().seed);
  CHECK(back.metadata().train_rows == model.metadata().train_rows);
  CHECK(back.metadata().converged == model.metadata().converged);
}

TEST_CASE("saving is deterministic and stable through a reload") {
  TempDir dir;
  const TrainedModel model = train_small();
  model.save(dir.file("a.txt"));
  model.save(dir.file("b.txt"));
  CHECK(slurp(dir.file("a.txt")) == slurp(dir.file("b.txt")));
  const TrainedModel back = TrainedModel::load(dir.file("a.txt"));
  back.save(dir.file("c.txt"));
  CHECK(slurp(dir.file("c.txt")) == slurp(dir.file("a.txt")));
}

TEST_CASE("predictions are bit-exact across a save/load cycle") {
  TempDir dir;
  const TrainedModel model = train_small();
  model.save(dir.file("model.txt"));
  const TrainedModel back = TrainedModel::load(dir.file("model.txt"));
  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    const Vector x = rng.uniform_vector(model.num_features(), -0.5, 1.5);
    CHECK(model.predict_score(x) == back.predict_score(x));
  }
}

TEST_CASE("load rejects unsupported format versions by name") {
  TempDir dir;
  const TrainedModel model = train_small();
  const auto path = dir.file("model.txt");
  model.save(path);
  std::string text = slurp(path);
  REQUIRE(text.rfind("csam-model 1\n", 0) == 0);
  spit(path, "csam-model 3\n" + text.substr(13));
  bool threw = false;
  try {
    TrainedModel::load(path);
  } catch (const ModelVersionError& e) {
    threw = true;
    CHECK(e.found() == 3);
    CHECK(e.supported() == 1);
    const std::string msg = e.what();
    CHECK(msg.find("version 3") != std::string::npos);
    CHECK(msg.find("supports version 1") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("load reports truncation with the byte offset") {
  TempDir dir;
  const TrainedModel model = train_small();
  const auto path = dir.file("model.txt");
  model.save(path);
  const std::string text = slurp(path);
  // Keep the first three complete lines; the reader must notice the document
  // ends early and say where.
  std::size_t cut = 0;
  for (int lines = 0; lines < 3; ++lines) cut = text.find('\n', cut) + 1;
  spit(path, text.substr(0, cut));
  bool threw = false;
  try {
    TrainedModel::load(path);
  } catch (const ModelTruncatedError& e) {
    threw = true;
    CHECK(e.byte_offset() == cut);
  }
  CHECK(threw);
}

TEST_CASE("load reports malformed fields with a byte offset") {
  TempDir dir;
  const TrainedModel model = train_small();
  const auto path = dir.file("model.txt");
  model.save(path);
  std::string text = slurp(path);
  const std::size_t at = text.find("lambda ");
  REQUIRE(at != std::string::npos);
  const std::size_t eol = text.find('\n', at);
  text.replace(at, eol - at, "lambda abc");
  spit(path, text);
  bool threw = false;
  try {
    TrainedModel::load(path);
  } catch (const ModelParseError& e) {
    threw = true;
    CHECK(e.byte_offset() == at);
    CHECK(std::string(e.what()).find("lambda") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("load rejects a reordered document") {
  TempDir dir;
  const TrainedModel model = train_small();
  const auto path = dir.file("model.txt");
  model.save(path);
  std::string text = slurp(path);
  // Swap the sigma and lambda lines; field order is part of the format.
  const std::size_t l0 = text.find("lambda ");
  const std::size_t l1 = text.find('\n', l0) + 1;
  const std::size_t s1 = text.find('\n', l1) + 1;
  const std::string lambda_line = text.substr(l0, l1 - l0);
  const std::string sigma_line = text.substr(l1, s1 - l1);
  REQUIRE(sigma_line.rfind("sigma ", 0) == 0);
  text.replace(l0, s1 - l0, sigma_line + lambda_line);
  spit(path, text);
  CHECK_THROWS_AS(TrainedModel::load(path), ModelParseError);
}

TEST_CASE("load rejects a missing header and a bad closing marker") {
  TempDir dir;
  const TrainedModel model = train_small();
  const auto path = dir.file("model.txt");
  model.save(path);
  const std::string text = slurp(path);

  spit(path, "not-a-model 1\n" + text);
  CHECK_THROWS_AS(TrainedModel::load(path), ModelParseError);

  std::string no_end = text;
  const std::size_t at = no_end.rfind("end\n");
  REQUIRE(at != std::string::npos);
  no_end.replace(at, 4, "fin\n");
  spit(path, no_end);
  CHECK_THROWS_AS(TrainedModel::load(path), ModelParseError);

  CHECK_THROWS_AS(TrainedModel::load(dir.file("missing.txt")), IoError);
}
