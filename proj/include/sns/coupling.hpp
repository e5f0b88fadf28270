#ifndef SNS_COUPLING_HPP
#define SNS_COUPLING_HPP

#include "sns/dynamics.hpp"

#include <iosfwd>

namespace sns {

/// How the low-mode control is assembled.
struct ControlOptions {
  /// Carry the viscosity in the (1 - t) A z^l term. false uses the bare
  /// (1 - t) A z^l, for runs where nu is absorbed into A.
  bool nu_in_control = true;
};

/// Prescribed low-frequency difference: (1 - t) pi_{N0} z on [0, 1], zero after.
Field zl_schedule(double t, const Field& z, int N0);

/// One exponential-Euler step of the deterministic high-frequency residual:
/// a_k <- exp(-nu |k|^2 dt) (a_k - dt [B(Z, Z) + B~(Z, X)]_k) on |k| > N0,
/// with Z = zl + zh. The result has no low modes.
Field step_zh(const BilinearWorkspace<double>& ws, const Field& zh, const Field& zl, const Field& X,
              double dt, const PhysicsParams& params);

/// Girsanov control computed from the driving path X:
///   t < 1:  Q^{-1}[-z^l + (1 - t) nu A z^l + B^l(Z) + B~^l(Z, X)],  Z = zl + zh
///   t >= 1: Q^{-1}[B^l(zh) + B~^l(zh, X)]
Field control_v(const BilinearWorkspace<double>& ws, double t, const Field& zl, const Field& zh,
                const Field& X, const Field& z, const PhysicsParams& params,
                const NoiseOperator& noise, ControlOptions options = {});

/// The same control written through the coupled path Y = X + Z:
///   t < 1:  Q^{-1}[-z^l + (1 - t) nu A z^l - B^l(Z) + B~^l(Z, Y)]
///   t >= 1: Q^{-1}[-B^l(zh) + B~^l(zh, Y)]
Field control_v_y_form(const BilinearWorkspace<double>& ws, double t, const Field& zl,
                       const Field& zh, const Field& Y, const Field& z,
                       const PhysicsParams& params, const NoiseOperator& noise,
                       ControlOptions options = {});

/// Co-evolves X, the residual zh, the control v and the log Girsanov density
/// along one base-measure noise path. The stochastic integral is evaluated at
/// the left point of each step.
class CoupledStepper {
 public:
  using Coefficients = Field::Coefficients;

  CoupledStepper(const ExponentialEuler& stepper, const NoiseOperator& noise,
                 ControlOptions control, const Field& x0, const Field& y0);

  /// Draws Q dW from `rng` and advances one step.
  void advance(PathRng& rng);

  /// Advances with a given increment Q dW.
  void advance(const Coefficients& qdw);

  int step_index() const { return n_; }
  double time() const { return n_ * stepper_.dt(); }

  const Coefficients& x() const { return x_; }
  const Coefficients& zl() const { return zl_; }
  const Coefficients& zh() const { return zh_; }
  /// Control used on the most recent step.
  const Coefficients& last_control() const { return v_; }

  /// X + zl + zh.
  Coefficients y() const { return x_ + zl_ + zh_; }

  double log_density() const { return log_m_; }
  double control_energy() const { return v_energy_; }
  /// max |zh| over the nodes visited with t <= 1.
  double sup_zh_unit_interval() const { return sup_zh_; }

 private:
  bool before_one(int n) const;
  void set_zl(int n);

  const ExponentialEuler& stepper_;
  const NoiseOperator& noise_;
  ControlOptions control_;
  Coefficients z_low_;  // pi_{N0}(y0 - x0)
  Eigen::ArrayXd low_mask_;
  Eigen::ArrayXd q_inv_;
  Eigen::ArrayXd control_stokes_;  // c |k|^2 on low modes, c = nu or 1
  Coefficients x_, zl_, zh_, v_, bxx_, bz_, qdw_;
  double log_m_ = 0.0;
  double v_energy_ = 0.0;
  double sup_zh_ = 0.0;
  int n_ = 0;
};

/// One realized coupling path.
struct CouplingTrajectory {
  Field x0;
  Field y0;
  SdePath x_path;
  std::vector<Field> zl;
  std::vector<Field> zh;
  std::vector<Field> v;  // control at each node (the value used on the step leaving it)
  std::vector<double> log_m;
  std::vector<double> v_energy;

  /// Coupled path Y = X + zl + zh at node i.
  Field y(std::size_t i) const { return x_path.states[i] + zl[i] + zh[i]; }
};

struct CouplingOptions {
  StepOptions step;
  ControlOptions control;
};

CouplingTrajectory run_coupled(const BilinearWorkspace<double>& ws, const Field& x0,
                               const Field& y0, double T, double dt, const PhysicsParams& params,
                               const NoiseOperator& noise, std::uint64_t seed,
                               CouplingOptions options = {});

/// CSV rows (t, |Z^l|, |Z^h|^2, |v|^2, logM, v_energy).
void write_trajectory_csv(std::ostream& os, const CouplingTrajectory& traj);

}  // namespace sns

#endif  // SNS_COUPLING_HPP
