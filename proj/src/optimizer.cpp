#include "csam/optimizer.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <string>

#include "csam/rng.hpp"

namespace csam {

namespace {

// 1/beta = 1 - exp(-1/sigma^2), computed with expm1 so large sigma stays
// accurate.
double inverse_normalizer(double sigma) {
  return -std::expm1(-1.0 / (sigma * sigma));
}

// sigma^2 / beta, the scale carried from the loss into the penalty of the
// coefficient subproblem.
double sigma_sq_over_beta(double sigma) {
  return sigma * sigma * inverse_normalizer(sigma);
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0))
    throw ConfigError("sigma must be positive, got " + std::to_string(sigma));
}

void check_aux(const Eigen::Ref<const Vector>& aux) {
  for (Index i = 0; i < aux.size(); ++i)
    if (!(aux[i] < 0.0))
      throw DomainError("auxiliary weight at index " + std::to_string(i) +
                        " must be negative, got " + std::to_string(aux[i]));
}

}  // namespace

void SolverConfig::validate(Index num_features) const {
  if (!(lambda > 0.0))
    throw ConfigError("lambda must be positive, got " + std::to_string(lambda));
  check_sigma(sigma);
  if (!(eta > 0.0))
    throw ConfigError("eta must be positive, got " + std::to_string(eta));
  if (!(epsilon > 0.0))
    throw ConfigError("epsilon must be positive, got " +
                      std::to_string(epsilon));
  if (outer_max_iter < 1 || inner_max_iter < 1)
    throw ConfigError("iteration budgets must be at least 1");
  if (feature_weights.size() != 0) {
    if (feature_weights.size() != num_features)
      throw DimensionError("expected " + std::to_string(num_features) +
                           " feature weights, got " +
                           std::to_string(feature_weights.size()));
    for (Index j = 0; j < feature_weights.size(); ++j)
      if (!(feature_weights[j] > 0.0) || !std::isfinite(feature_weights[j]))
        throw ConfigError("feature weight at index " + std::to_string(j) +
                          " must be positive and finite");
  }
}

Vector SolverConfig::resolved_weights(Index num_features) const {
  if (feature_weights.size() == 0) return Vector::Ones(num_features);
  if (feature_weights.size() != num_features)
    throw DimensionError("expected " + std::to_string(num_features) +
                         " feature weights, got " +
                         std::to_string(feature_weights.size()));
  return feature_weights;
}

double correntropy_normalizer(double sigma) {
  check_sigma(sigma);
  return 1.0 / inverse_normalizer(sigma);
}

double correntropy_loss(double y, double f, double sigma) {
  check_sigma(sigma);
  const double margin = 1.0 - y * f;
  return -std::expm1(-(margin * margin) / (sigma * sigma)) /
         inverse_normalizer(sigma);
}

Vector hq_weights(const Eigen::Ref<const Vector>& residuals, double sigma) {
  check_sigma(sigma);
  Vector w = (-(residuals.array().square() / (sigma * sigma))).exp().matrix() *
             -1.0;
  // exp underflows to zero for extreme residuals, which would push a weight
  // out of (-1, 0) and make its conjugate term log(-b) undefined; pin such
  // entries to the smallest representable negative value instead.
  for (Index i = 0; i < w.size(); ++i)
    if (w[i] == 0.0) w[i] = -std::numeric_limits<double>::denorm_min();
  return w;
}

double hq_conjugate(double b) {
  if (!(b < 0.0))
    throw DomainError("conjugate argument must be negative, got " +
                      std::to_string(b));
  return -b * std::log(-b) + b;
}

Vector weighted_ridge_update(const Eigen::Ref<const Matrix>& phi,
                             const Eigen::Ref<const Vector>& y,
                             const Eigen::Ref<const Vector>& aux,
                             const Eigen::Ref<const Vector>& split,
                             const Eigen::Ref<const Vector>& dual, double eta) {
  if (y.size() != phi.rows() || aux.size() != phi.rows())
    throw DimensionError("labels and auxiliary weights must match rows of the "
                         "design matrix");
  if (split.size() != phi.cols() || dual.size() != phi.cols())
    throw DimensionError("split and dual vectors must match design columns");
  check_aux(aux);
  if (!(eta > 0.0))
    throw ConfigError("eta must be positive, got " + std::to_string(eta));

  const Vector d = -aux;
  Matrix system = 2.0 * phi.transpose() * d.asDiagonal() * phi;
  system.diagonal().array() += eta;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success)
    throw std::logic_error(
        "weighted ridge system is not positive definite; this cannot happen "
        "with negative auxiliary weights and positive eta");
  return llt.solve(2.0 * phi.transpose() * d.cwiseProduct(y).eval() +
                   eta * (split - dual));
}

Vector soft_threshold(const Eigen::Ref<const Vector>& a, double k,
                      PenaltyNorm q) {
  if (q == PenaltyNorm::l1) {
    return (a.array() - k).max(0.0).matrix() -
           ((-a).array() - k).max(0.0).matrix();
  }
  const double norm = a.norm();
  if (norm == 0.0) return Vector::Zero(a.size());
  const double scale = std::max(0.0, 1.0 - k / norm);
  return scale * a;
}

Vector admm_dual_update(const Eigen::Ref<const Vector>& dual,
                        const Eigen::Ref<const Vector>& coef,
                        const Eigen::Ref<const Vector>& split) {
  if (dual.size() != coef.size() || split.size() != coef.size())
    throw DimensionError("dual, coefficient, and split sizes must match");
  // Grouped as dual + (coef - split) so that a consensus pair (coef == split)
  // leaves the dual bit-identical instead of perturbed by rounding.
  return dual + (coef - split);
}

Vector group_norms(const Eigen::Ref<const Vector>& coef, Index block_size,
                   PenaltyNorm q) {
  if (block_size < 1 || coef.size() % block_size != 0)
    throw DimensionError("coefficient length " + std::to_string(coef.size()) +
                         " is not a multiple of the block size " +
                         std::to_string(block_size));
  const Index p = coef.size() / block_size;
  Vector norms(p);
  for (Index j = 0; j < p; ++j) {
    auto block = coef.segment(j * block_size, block_size);
    norms[j] =
        q == PenaltyNorm::l1 ? block.lpNorm<1>() : block.norm();
  }
  return norms;
}

bool DivergenceGuard::observe(double objective) {
  if (has_last_ && objective > last_)
    ++streak_;
  else
    streak_ = 0;
  last_ = objective;
  has_last_ = true;
  return streak_ > limit_;
}

AdmmResult admm_solve(const DesignMatrix& design,
                      const Eigen::Ref<const Vector>& y,
                      const Eigen::Ref<const Vector>& aux,
                      const SolverConfig& config, const AdmmStart* start) {
  const Index n = design.n();
  const Index d = design.block_size();
  const Index p = design.num_features;
  const Index dp = design.phi.cols();
  if (y.size() != n || aux.size() != n)
    throw DimensionError("labels and auxiliary weights must have " +
                         std::to_string(n) + " entries");
  check_aux(aux);
  if (!(config.lambda >= 0.0))
    throw ConfigError("lambda must be non-negative, got " +
                      std::to_string(config.lambda));
  if (!(config.eta > 0.0))
    throw ConfigError("eta must be positive, got " +
                      std::to_string(config.eta));

  const Vector weights = config.resolved_weights(p);
  // Penalty weight carried into the subproblem: lambda * sigma^2 / beta.
  const double penalty_scale =
      config.lambda * sigma_sq_over_beta(config.sigma);
  // Per-block shrinkage threshold of the split update.
  const Vector thresholds = penalty_scale / config.eta * weights;

  const Vector dvec = -aux;
  // The quadratic part is fixed for the whole solve: factor once, then each
  // iteration is a cheap back-substitution with a fresh right-hand side.
  Matrix system = 2.0 * design.phi.transpose() * dvec.asDiagonal() * design.phi;
  system.diagonal().array() += config.eta;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success)
    throw std::logic_error(
        "ADMM system is not positive definite; this cannot happen with "
        "negative auxiliary weights and positive eta");
  const Vector data_rhs =
      2.0 * design.phi.transpose() * dvec.cwiseProduct(y).eval();

  AdmmResult res;
  res.coef = start ? start->coef : Vector::Zero(dp);
  res.split = start ? start->split : Vector::Zero(dp);
  res.dual = start ? start->dual : Vector::Zero(dp);

  DivergenceGuard guard(20);
  for (int it = 0; it < config.inner_max_iter; ++it) {
    const Vector prev = res.coef;
    res.coef = llt.solve(data_rhs + config.eta * (res.split - res.dual));
    for (Index j = 0; j < p; ++j)
      res.split.segment(j * d, d) = soft_threshold(
          res.coef.segment(j * d, d) + res.dual.segment(j * d, d),
          thresholds[j], config.q);
    res.dual = admm_dual_update(res.dual, res.coef, res.split);

    res.trace.iterations = it + 1;
    res.trace.primal_inf = (res.coef - res.split).lpNorm<Eigen::Infinity>();
    res.trace.dcoef_inf = (res.coef - prev).lpNorm<Eigen::Infinity>();

    // Subproblem objective of the sparse candidate, evaluated entirely at
    // the split iterate. Evaluating the data term at the ridge iterate
    // instead would rise monotonically toward y'Dy whenever a large penalty
    // pins the split at zero, reading as divergence on a convergent run.
    const Vector resid = y - design.phi * res.split;
    double objective = resid.dot(dvec.cwiseProduct(resid));
    for (Index j = 0; j < p; ++j) {
      auto block = res.split.segment(j * d, d);
      objective += penalty_scale * weights[j] *
                   (config.q == PenaltyNorm::l1 ? block.lpNorm<1>()
                                                : block.norm());
    }
    res.trace.objective.push_back(objective);
    if (!std::isfinite(objective))
      throw SolverError("inner solver produced a non-finite objective at "
                        "iteration " +
                            std::to_string(it + 1),
                        res.trace);
    if (guard.observe(objective))
      throw SolverError(
          "inner solver diverged: objective increased over more than 20 "
          "consecutive iterations",
          res.trace);

    if (res.trace.primal_inf < config.epsilon &&
        res.trace.dcoef_inf < config.epsilon) {
      res.trace.converged = true;
      break;
    }
  }
  return res;
}

double hq_objective(const Eigen::Ref<const Vector>& coef,
                    const Eigen::Ref<const Vector>& aux,
                    const DesignMatrix& design,
                    const Eigen::Ref<const Vector>& y,
                    const SolverConfig& config) {
  check_aux(aux);
  check_sigma(config.sigma);
  if (y.size() != design.n() || aux.size() != design.n())
    throw DimensionError("labels and auxiliary weights must match design rows");
  if (coef.size() != design.phi.cols())
    throw DimensionError("coefficient length must match design columns");

  const double s2 = config.sigma * config.sigma;
  const Vector resid = y - design.phi * coef;
  double data = 0.0;
  for (Index i = 0; i < resid.size(); ++i)
    data += aux[i] * resid[i] * resid[i] / s2 - hq_conjugate(aux[i]);
  data /= static_cast<double>(design.n());

  const Vector weights = config.resolved_weights(design.num_features);
  const Vector norms = group_norms(coef, design.block_size(), config.q);
  const double penalty =
      config.lambda * inverse_normalizer(config.sigma) * weights.dot(norms);
  return data - penalty;
}

double penalized_risk(const Eigen::Ref<const Vector>& coef,
                      const DesignMatrix& design,
                      const Eigen::Ref<const Vector>& y,
                      const SolverConfig& config) {
  if (y.size() != design.n())
    throw DimensionError("labels must match design rows");
  if (coef.size() != design.phi.cols())
    throw DimensionError("coefficient length must match design columns");
  const Vector scores = design.phi * coef;
  double loss = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    loss += correntropy_loss(y[i], scores[i], config.sigma);
  loss /= static_cast<double>(design.n());
  const Vector weights = config.resolved_weights(design.num_features);
  const Vector norms = group_norms(coef, design.block_size(), config.q);
  return loss + config.lambda * weights.dot(norms);
}

FitResult fit(const FeatureMatrix& data, const BasisConfig& basis,
              const SolverConfig& config) {
  data.validate();
  basis.validate();
  config.validate(data.p());

  FitResult result;
  result.basis = basis;
  result.num_features = data.p();
  result.stats = fit_normalizer(data.values);
  const DesignMatrix design = expand(apply_normalizer(data.values, result.stats),
                                     basis);
  const Index n = design.n();
  const Vector& y = data.labels;

  if ((y.array() == y[0]).all())
    result.trace.warnings.push_back(
        "training labels contain a single class (" +
        std::string(y[0] > 0 ? "+1" : "-1") +
        "); the fitted scores will favor that class");

  // The inner solver works on the n-scaled subproblem (data term summed, not
  // averaged), so both lambda and eta are multiplied by n to keep the
  // user-facing values per-sample. The iterates are identical to solving the
  // averaged subproblem with the original (lambda, eta).
  SolverConfig inner = config;
  inner.lambda *= static_cast<double>(n);
  inner.eta *= static_cast<double>(n);

  Rng rng(config.seed);
  result.coef = rng.uniform_vector(design.phi.cols());

  double prev_objective = -std::numeric_limits<double>::infinity();
  AdmmStart start;
  start.split = Vector::Zero(design.phi.cols());
  start.dual = Vector::Zero(design.phi.cols());
  for (int t = 0; t < config.outer_max_iter; ++t) {
    const Vector aux = hq_weights(y - design.phi * result.coef, config.sigma);

    start.coef = result.coef;
    if (!config.warm_start) {
      start.split.setZero();
      start.dual.setZero();
    }
    AdmmResult inner_result = admm_solve(design, y, aux, inner, &start);
    if (config.warm_start) {
      start.split = inner_result.split;
      start.dual = inner_result.dual;
    }

    OuterIteration row;
    row.objective = hq_objective(inner_result.coef, aux, design, y, config);
    row.penalized_risk = penalized_risk(inner_result.coef, design, y, config);
    row.inner_iterations = inner_result.trace.iterations;
    row.inner_converged = inner_result.trace.converged;
    row.primal_inf = inner_result.trace.primal_inf;
    row.dcoef_inf =
        (inner_result.coef - result.coef).lpNorm<Eigen::Infinity>();
    result.coef = std::move(inner_result.coef);

    if (!std::isfinite(row.objective)) {
      result.trace.iterations.push_back(row);
      throw SolverError("objective became non-finite at outer iteration " +
                            std::to_string(t + 1),
                        result.trace);
    }
    result.trace.iterations.push_back(row);

    if (row.objective - prev_objective <= config.epsilon) {
      result.trace.converged = true;
      break;
    }
    prev_objective = row.objective;
  }
  return result;
}

std::vector<double> default_lambda_grid() {
  // 1-2-5 preferred-number ladder across the useful decades. The knee of the
  // accuracy curve usually sits between 1e-3 and 1, so the ladder keeps
  // half-decade resolution there instead of jumping a full decade at a time.
  return {1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3, 2e-3,
          5e-3, 1e-2, 2e-2, 5e-2, 1e-1, 2e-1, 5e-1, 1.0};
}

}  // namespace csam
