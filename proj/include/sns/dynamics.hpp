#ifndef SNS_DYNAMICS_HPP
#define SNS_DYNAMICS_HPP

#include "sns/bilinear.hpp"
#include "sns/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sns {

/// Raised when a trajectory leaves the blow-up guard or turns non-finite.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, const std::string& what)
      : std::runtime_error(what + " at t = " + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Degenerate covariance Q: diagonal with amplitude q_k on the modes
/// |k| <= N0, zero above.
class NoiseOperator {
 public:
  NoiseOperator() = default;

  /// `q` holds one amplitude per representative mode; entries above N0 must be zero.
  NoiseOperator(GridPtr grid, int N0, Eigen::ArrayXd q);

  static NoiseOperator uniform(GridPtr grid, int N0, double q);
  static NoiseOperator zero(GridPtr grid, int N0) { return uniform(std::move(grid), N0, 0.0); }

  const GridPtr& grid_ptr() const { return grid_; }
  int N0() const { return N0_; }
  const Eigen::ArrayXd& q() const { return q_; }

  /// tr(QQ*): q_k^2 summed over real degrees of freedom, two per representative.
  double trace_qq() const { return trace_; }

  /// max 1/q_k over forced modes; +inf when some forced mode has q_k = 0.
  double c0() const { return c0_; }

  /// True when q_k > 0 on every mode |k| <= N0, so Q is invertible on the low modes.
  bool invertible_on_low() const { return std::isfinite(c0_); }

  Field apply(const Field& x) const;

  /// Q^{-1} on the low modes. Throws if Q is not invertible there.
  Field apply_inverse(const Field& x) const;

 private:
  GridPtr grid_;
  int N0_ = 0;
  Eigen::ArrayXd q_;
  Eigen::ArrayXd q_inv_;
  double trace_ = 0.0;
  double c0_ = 0.0;
};

/// Gaussian source for one path. Streams are derived from (master seed,
/// stream tag, path index) so results do not depend on scheduling.
class PathRng {
 public:
  PathRng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t path);

  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Q dW over a step dt: stream amplitude q_k (g1 + i g2) / sqrt(2) * sqrt(dt)
/// on |k| <= N0, exactly zero above.
Field wiener_increment(const NoiseOperator& noise, double dt, PathRng& rng);

/// In-place variant writing amplitudes only; draws the same numbers as wiener_increment.
void wiener_increment(const NoiseOperator& noise, double dt, PathRng& rng,
                      Field::Coefficients& out);

/// Options shared by the integrators.
struct StepOptions {
  bool nonlinear = true;  // false drops B, giving an Ornstein-Uhlenbeck system
  double blowup_norm = 1e6;
};

/// Exponential Euler for dX + [nu A X + B(X, X)] dt = Q dW:
/// a_k <- exp(-nu |k|^2 dt) (a_k - dt B(X,X)_k + dW_k).
class ExponentialEuler {
 public:
  ExponentialEuler(const BilinearWorkspace<double>& ws, const PhysicsParams& params, double dt,
                   StepOptions options = {});

  double dt() const { return dt_; }
  const Eigen::ArrayXd& decay() const { return decay_; }
  const PhysicsParams& params() const { return params_; }
  const StepOptions& options() const { return options_; }
  const BilinearWorkspace<double>& workspace() const { return ws_; }

  /// Advances `x` in place; `time` is only used for error reporting.
  void step(Field::Coefficients& x, const Field::Coefficients& dW, double time) const;

 private:
  const BilinearWorkspace<double>& ws_;
  PhysicsParams params_;
  double dt_;
  StepOptions options_;
  Eigen::ArrayXd decay_;
};

/// Throws BlowUpError if `x` is non-finite or its norm exceeds the guard.
void check_finite(const Field::Coefficients& x, double time, double guard);

Field step_exponential_euler(const BilinearWorkspace<double>& ws, const Field& X, const Field& dW,
                             double dt, const PhysicsParams& params, StepOptions options = {});

/// Number of steps M with M dt = T; throws unless dt divides T.
int step_count(double T, double dt);

/// One realized path of the forced equation.
struct SdePath {
  std::vector<double> times;
  std::vector<Field> states;
  std::vector<double> dissipation;  // nu int_0^t |A^{1/2} X|^2 ds, trapezoidal
  std::vector<Field> increments;    // Q dW per step; increments[n] drives step n -> n+1
  double nu = 0.0;

  /// Node index of time t; throws std::invalid_argument for off-grid t.
  std::size_t node(double t) const;
};

SdePath simulate_x(const BilinearWorkspace<double>& ws, const Field& x0, double T, double dt,
                   const PhysicsParams& params, const NoiseOperator& noise, std::uint64_t seed,
                   StepOptions options = {});

/// |X(t)|^2 + nu int_0^t |A^{1/2} X|^2 ds.
double energy_functional(const SdePath& path, double t);

/// CSV rows (t, |X|^2, |A^{1/2}X|^2, dissipation).
void write_path_csv(std::ostream& os, const SdePath& path);

/// Stream tags for PathRng.
enum class Stream : std::uint64_t {
  base = 1,
  direct = 2,
  synchronous = 3,
  single = 4,
};

}  // namespace sns

#endif  // SNS_DYNAMICS_HPP
