#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "csam/basis.hpp"
#include "csam/types.hpp"

namespace csam {

// Hyperparameters of the half-quadratic trainer and its inner ADMM solver.
struct SolverConfig {
  double lambda = 5e-4;     // sparsity penalty weight (per-sample scale)
  double sigma = 1.0;       // correntropy loss scale
  PenaltyNorm q = PenaltyNorm::l2;  // block norm of the penalty
  double eta = 0.1;         // ADMM augmented penalty (per-sample scale)
  double epsilon = 1e-4;    // stopping tolerance, outer and inner
  int outer_max_iter = 50;  // half-quadratic iterations
  int inner_max_iter = 200;  // ADMM iterations per outer pass
  Vector feature_weights;   // per-feature penalty weights; empty = all ones
  std::uint64_t seed = 0;   // coefficient initialization
  bool warm_start = false;  // reuse (split, dual) across outer passes

  // Strict validation for training entry points. admm_solve itself also
  // accepts lambda == 0 (the unpenalized limit).
  void validate(Index num_features) const;
  Vector resolved_weights(Index num_features) const;
};

// Normalizer beta = 1 / (1 - exp(-1/sigma^2)); keeps the loss in [0, beta]
// with value exactly 1 at zero score.
double correntropy_normalizer(double sigma);

// Robust bounded loss: beta * (1 - exp(-(1 - y*f)^2 / sigma^2)).
double correntropy_loss(double y, double f, double sigma);

// Auxiliary half-quadratic weights b_i = -exp(-r_i^2 / sigma^2) for
// residuals r = y - f. Always in [-1, 0).
Vector hq_weights(const Eigen::Ref<const Vector>& residuals, double sigma);

// Convex conjugate term g(b) = -b*log(-b) + b for b < 0. The identity
// exp(-s) = sup_{b<0} (b*s - g(b)) is attained at b = -exp(-s).
double hq_conjugate(double b);

// One ADMM coefficient step: the minimizer of
//   (y - Phi a)' D (y - Phi a) + eta/2 * ||a - split + dual||^2
// with D = diag(-aux), i.e. a = (2 Phi' D Phi + eta I)^{-1} (2 Phi' D y +
// eta (split - dual)), computed with a Cholesky solve, never an inverse.
Vector weighted_ridge_update(const Eigen::Ref<const Matrix>& phi,
                             const Eigen::Ref<const Vector>& y,
                             const Eigen::Ref<const Vector>& aux,
                             const Eigen::Ref<const Vector>& split,
                             const Eigen::Ref<const Vector>& dual, double eta);

// Proximal shrinkage of one coefficient block: argmin_x 1/2||x - a||^2 +
// k||x||_q. q=1: elementwise (a-k)_+ - (-a-k)_+. q=2: block scaling
// (1 - k/||a||)_+ * a, the zero vector when ||a|| = 0.
Vector soft_threshold(const Eigen::Ref<const Vector>& a, double k,
                      PenaltyNorm q);

// Scaled dual ascent: dual + coef - split.
Vector admm_dual_update(const Eigen::Ref<const Vector>& dual,
                        const Eigen::Ref<const Vector>& coef,
                        const Eigen::Ref<const Vector>& split);

// Per-feature block norms of a flattened coefficient vector.
Vector group_norms(const Eigen::Ref<const Vector>& coef, Index block_size,
                   PenaltyNorm q);

// Consecutive-increase watchdog for the inner solver: observing more than
// `limit` strictly increasing objective values in a row reports divergence.
class DivergenceGuard {
 public:
  explicit DivergenceGuard(int limit) : limit_(limit) {}
  // Returns true when the increase streak has exceeded the limit.
  bool observe(double objective);

 private:
  int limit_;
  int streak_ = 0;
  double last_ = 0.0;
  bool has_last_ = false;
};

struct AdmmTrace {
  int iterations = 0;
  bool converged = false;
  double primal_inf = 0.0;  // ||coef - split||_inf at exit
  double dcoef_inf = 0.0;   // ||coef - coef_prev||_inf at exit
  std::vector<double> objective;  // split objective per iteration
};

struct AdmmResult {
  Vector coef;
  Vector split;
  Vector dual;
  AdmmTrace trace;
};

// Optional warm start for admm_solve. `coef` seeds only the first
// coefficient-change stopping check.
struct AdmmStart {
  Vector coef;
  Vector split;
  Vector dual;
};

// Inner solver for the coefficient subproblem at fixed auxiliary weights:
//   min_a (y - Phi a)' D (y - Phi a)
//         + lambda*sigma^2/beta * sum_j w_j ||a_j||_q,
// split via a copy variable with scaled dual and augmented penalty eta.
// Stops when ||coef - split||_inf < eps and ||coef - coef_prev||_inf < eps.
// Throws SolverError (carrying the partial trace) on divergence or
// non-finite iterates.
AdmmResult admm_solve(const DesignMatrix& design,
                      const Eigen::Ref<const Vector>& y,
                      const Eigen::Ref<const Vector>& aux,
                      const SolverConfig& config,
                      const AdmmStart* start = nullptr);

// Concave surrogate objective
//   R(a, b) = 1/n * sum_i [ b_i (y_i - f_i)^2 / sigma^2 - g(b_i) ]
//           - lambda/beta * sum_j w_j ||a_j||_q,
// maximized by alternating hq_weights and admm_solve. Errors if any
// auxiliary weight is >= 0.
double hq_objective(const Eigen::Ref<const Vector>& coef,
                    const Eigen::Ref<const Vector>& aux,
                    const DesignMatrix& design,
                    const Eigen::Ref<const Vector>& y,
                    const SolverConfig& config);

// Companion value: mean correntropy loss plus lambda * sum_j w_j ||a_j||_q.
double penalized_risk(const Eigen::Ref<const Vector>& coef,
                      const DesignMatrix& design,
                      const Eigen::Ref<const Vector>& y,
                      const SolverConfig& config);

// One outer-iteration record of the trainer.
struct OuterIteration {
  double objective = 0.0;       // R(coef, aux) after the pass
  double penalized_risk = 0.0;  // companion risk after the pass
  int inner_iterations = 0;
  bool inner_converged = false;
  double primal_inf = 0.0;  // ||coef - split||_inf at inner exit
  double dcoef_inf = 0.0;   // ||coef_t - coef_{t-1}||_inf across the pass
};

struct SolverTrace {
  std::vector<OuterIteration> iterations;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Thrown on solver divergence or non-finite objectives; carries whatever
// trace existed when the failure was detected.
class SolverError : public Error {
 public:
  SolverError(const std::string& msg, AdmmTrace inner)
      : Error(msg), inner_(std::move(inner)) {}
  SolverError(const std::string& msg, SolverTrace outer)
      : Error(msg), outer_(std::move(outer)) {}
  const AdmmTrace& inner_trace() const { return inner_; }
  const SolverTrace& outer_trace() const { return outer_; }

 private:
  AdmmTrace inner_;
  SolverTrace outer_;
};

struct FitResult {
  Vector coef;  // flattened, feature-major blocks of length d
  SolverTrace trace;
  NormalizationStats stats;
  BasisConfig basis;
  Index num_features = 0;
};

// Full trainer: normalize, expand, initialize coefficients from U(0,1) with
// the config seed, then alternate auxiliary-weight updates with inner ADMM
// passes until the surrogate objective gain is at most epsilon or the
// iteration budget is exhausted. The split and dual variables restart at
// zero each pass unless warm_start is set.
//
// The user-facing lambda and eta are per-sample quantities: the objective
// divides the data term by n, so the inner solver receives (n*lambda, n*eta),
// which is algebraically the same subproblem with both sides scaled by n.
FitResult fit(const FeatureMatrix& data, const BasisConfig& basis,
              const SolverConfig& config);

// Grid used by the sweep command when no explicit grid is given.
std::vector<double> default_lambda_grid();

}  // namespace csam
