#ifndef SNS_ESTIMATORS_HPP
#define SNS_ESTIMATORS_HPP

#include "sns/bounds.hpp"
#include "sns/coupling.hpp"
#include "sns/stats.hpp"
#include "sns/test_functions.hpp"

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sns {

/// Grid, workspace, physics and noise bundled for the estimators.
struct Model {
  GridPtr grid;
  std::shared_ptr<const BilinearWorkspace<double>> ws;
  PhysicsParams params;
  NoiseOperator noise;

  Model(GridPtr grid, PhysicsParams params, NoiseOperator noise);

  /// Uniform amplitude q on |k| <= N0.
  static Model uniform(int N, double nu, int N0, double q);

  BoundConstants constants(const C2Options& c2 = {}) const;
};

struct SimConfig {
  double dt = 1e-2;
  long n_paths = 10000;
  std::uint64_t seed = 1;
  StepOptions step;
  ControlOptions control;
  int bootstrap_resamples = 200;
};

/// Step index of each time. Times must be nonnegative, nondecreasing and on the dt grid.
std::vector<int> time_nodes(std::span<const double> times, double dt);

/// Observers are called from worker threads; each path index is visited by
/// exactly one thread, so writing into per-path slots needs no locking.
using PlainObserver =
    std::function<void(long path, std::size_t node, const Field::Coefficients& x, double dissipation)>;
using PairObserver = std::function<void(long path, std::size_t node, const Field::Coefficients& a,
                                        const Field::Coefficients& b)>;
using CoupledObserver = std::function<void(long path, std::size_t node, const CoupledStepper& s)>;

/// Independent paths from x0, each driven by PathRng(seed, stream, path).
void run_plain_ensemble(const Model& m, const Field& x0, std::span<const double> times,
                        const SimConfig& cfg, Stream stream, const PlainObserver& observe);

/// Pairs from (a0, b0) sharing one noise path each (synchronous coupling).
void run_synchronous_pairs(const Model& m, const Field& a0, const Field& b0,
                           std::span<const double> times, const SimConfig& cfg, Stream stream,
                           const PairObserver& observe);

/// Coupled (X, Y, logM) paths on the base stream. The X paths coincide with
/// run_plain_ensemble(..., Stream::base, ...) bit for bit.
void run_coupled_ensemble(const Model& m, const Field& x0, const Field& y0,
                          std::span<const double> times, const SimConfig& cfg,
                          const CoupledObserver& observe);

/// One-sided statistical inequality lhs <= rhs with pass rule
/// lhs.mean - 3 std_error <= rhs.
struct InequalityReport {
  std::string name;
  Estimate lhs;
  double rhs = 0.0;
  /// Nonzero when rhs is estimated from the same paths as lhs; the pass
  /// rule then uses the standard error of the paired difference.
  double rhs_std_error = 0.0;
  double std_error = 0.0;  // standard error used by the pass rule
  double margin = 0.0;     // rhs - lhs.mean
  double margin_sigmas = 0.0;
  bool pass = false;
  std::map<std::string, double> inputs;
  std::vector<std::string> warnings;

  /// Fills margin, margin_sigmas and pass from lhs, rhs and std_error.
  void finalize();
};

Estimate semigroup_estimate(const Model& m, const TestFunction& f, const Field& x0, double t,
                            const SimConfig& cfg);

/// One estimate per time from a single ensemble.
std::vector<Estimate> semigroup_estimates(const Model& m, const TestFunction& f, const Field& x0,
                                          std::span<const double> times, const SimConfig& cfg,
                                          Stream stream = Stream::base);

struct WeightedEstimate {
  Estimate estimate;
  Estimate weight_mean;  // E[exp(logM)], should be 1
  double n_eff = 0.0;
  bool weight_degenerate = false;  // n_eff < 10
};

/// Mean of exp(logM(t)) f(Y(t)) over coupled paths: an estimate of P_t f(y0).
WeightedEstimate weighted_semigroup_estimate(const Model& m, const TestFunction& f,
                                             const Field& x0, const Field& y0, double t,
                                             const SimConfig& cfg);

struct EntropyEstimate {
  double t = 0.0;
  Estimate half_control_energy;  // E[M (1/2) int_0^t |v|^2]
  Estimate m_log_m;              // E[M log M]
  double bound = 0.0;            // ((L1+L3)|z|^4 + (L2+L4)|z|^2) / 2
  bool within_bound = false;     // half_control_energy.mean - 3 std_error <= bound
  bool forms_agree = false;      // |difference| <= 3 combined std_error
  double n_eff = 0.0;
};

EntropyEstimate entropy_estimate(const Model& m, const Field& x0, const Field& y0, double t,
                                 const SimConfig& cfg);

/// One estimate per time from a single coupled ensemble.
std::vector<EntropyEstimate> entropy_estimates(const Model& m, const Field& x0, const Field& y0,
                                               std::span<const double> times, const SimConfig& cfg);

struct ZhMomentPoint {
  double t = 0.0;
  LogMeanEstimate moment;  // log E|Z^h(t)|^{2p}
  double log_envelope = 0.0;
  bool pass = false;
};

struct ZhDecayReport {
  int p = 1;
  double z_norm = 0.0;
  bool identically_zero = false;
  LogMeanEstimate sup_moment;  // log E sup_{[0,1]} |Z^h|^{2p}
  double log_sup_envelope = 0.0;
  bool sup_pass = false;
  std::vector<ZhMomentPoint> points;
  double fitted_rate = 0.0;  // slope of log moment against t
  double fitted_rate_std_error = 0.0;
  double envelope_rate = 0.0;  // -(2 nu p N0^2 - trQQ)
  bool pass = false;           // every envelope check passes and the fitted slope is negative
};

/// Moments of the high-frequency residual on t_grid (all t > 1). Requires
/// the p-th moment hypotheses and at least three grid points.
ZhDecayReport zh_moment_decay(const Model& m, int p, const Field& x0, const Field& y0,
                              std::span<const double> t_grid, const SimConfig& cfg);

/// E exp(|X(t)|^2 + nu int_0^t |A^{1/2}X|^2) <= exp(|x0|^2 + trQQ t), aggregated in log space.
InequalityReport exp_moment_check(const Model& m, const Field& x0, double t, const SimConfig& cfg);

/// One cell of the log-Harnack matrix, kept unscaled so the constants can be
/// rescaled without rerunning the ensemble.
struct MlhCell {
  std::size_t f_index = 0;
  double t = 0.0;
  double z_norm = 0.0;
  double y_norm = 0.0;
  double dlogf_sup = 0.0;
  Estimate lhs;       // E[M log f(Y(t))]
  Estimate ptf_x;     // E f(X(t))
  double paired_std_error = 0.0;
  double n_eff = 0.0;

  /// Report with the constant terms multiplied by `scale`.
  InequalityReport report(const BoundConstants& c, double scale = 1.0) const;
};

/// All (f, t) cells for one pair (x0, y0) from a single coupled ensemble.
/// Throws HypothesisError unless the log-Harnack hypotheses hold.
std::vector<MlhCell> mlh_cells(const Model& m, const std::vector<TestFunction>& fs,
                               const Field& x0, const Field& y0, std::span<const double> times,
                               const SimConfig& cfg);

InequalityReport mlh_check(const Model& m, const TestFunction& f, const Field& x0, const Field& y0,
                           double t, const SimConfig& cfg, double scale = 1.0);

struct ProbeCell {
  std::size_t direction = 0;
  double eps = 0.0;
  double t = 0.0;
  Estimate quotient;        // (P_t f(x0 + eps h) - P_t f(x0)) / eps
  double analytic = 0.0;    // Df(x0) . h, reported at t = 0
  double envelope = 0.0;
  bool pass = false;        // |quotient.mean| - 3 std_error <= envelope
};

/// Difference quotients from synchronous pairs. The envelope is
///   ||f||^2 + [(L1+L3) eps^4 + (L2+L4) eps^2] / (2 eps^2) + 2 delta(t) C~ ||Df||
/// with the constants evaluated at |y| = max(|x0|, |x0 + eps h|).
std::vector<ProbeCell> gradient_probe(const Model& m, const TestFunction& f, const Field& x0,
                                      const std::vector<Field>& directions,
                                      std::span<const double> times,
                                      std::span<const double> eps_list, const SimConfig& cfg);

/// d_gamma(x, y) = min(1, |x - y| / gamma).
double dgamma(const Field::Coefficients& x, const Field::Coefficients& y, double gamma);

struct DgammaCell {
  double t = 0.0;
  double gamma = 0.0;
  Estimate upper;
  Estimate lower;
  std::size_t best_function = 0;
  bool sandwich = false;  // lower.mean - 3 se <= upper.mean + 3 se
};

/// Upper bound from synchronous pairs; lower bound as the largest mean
/// difference over a fixed dictionary of 1-Lipschitz functions bounded by 1:
/// clipped ramps clamp(<u - c, e>/gamma, -1/2, 1/2) and distances
/// min(1, |pi_m u - c| / gamma). Centers follow the linearized mean flow.
std::vector<DgammaCell> dgamma_distance_bounds(const Model& m, const Field& x0, const Field& y0,
                                               std::span<const double> times,
                                               std::span<const double> gammas,
                                               const SimConfig& cfg, int dictionary_size = 32);

/// E[fg] <= E f log E e^g + E[f log f] - E f log E f on the empirical measure,
/// with pass = lhs <= rhs + 1e-12 |rhs|.
InequalityReport entropy_inequality_check(std::span<const double> f_samples,
                                          std::span<const double> g_samples);

}  // namespace sns

#endif  // SNS_ESTIMATORS_HPP
