#include "sns/coupling.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace sns {

namespace {

// Times within this distance of 1 are treated as t = 1, so Z^l vanishes
// exactly at the end of the control window.
constexpr double kUnitTol = 1e-12;

bool in_control_window(double t) { return t < 1.0 - kUnitTol; }

double control_coefficient(const PhysicsParams& params, ControlOptions options) {
  return options.nu_in_control ? params.nu : 1.0;
}

}  // namespace

Field zl_schedule(double t, const Field& z, int N0) {
  if (!(t >= 0.0)) throw std::invalid_argument("zl_schedule: t must be nonnegative");
  if (!in_control_window(t)) return Field::zero(z.grid_ptr());
  return (1.0 - t) * low_pass(N0, z);
}

Field step_zh(const BilinearWorkspace<double>& ws, const Field& zh, const Field& zl, const Field& X,
              double dt, const PhysicsParams& params) {
  zh.require_same(zl);
  zh.require_same(X);
  require_workspace(ws, X);
  validate(params, ws.grid());
  if (!(dt > 0.0)) throw std::invalid_argument("step_zh: dt must be positive");
  Field::Coefficients bxx, bz;
  ws.apply_coupled(X.amps(), (zl + zh).amps(), bxx, bz);
  Field out(zh.grid_ptr());
  const auto& k2 = ws.grid().k2();
  const double r2 = double(params.N0) * params.N0;
  for (Index i = 0; i < out.size(); ++i) {
    if (k2[i] <= r2) continue;
    out.amps()[i] = std::exp(-params.nu * k2[i] * dt) * (zh.amps()[i] - dt * bz[i]);
  }
  return out;
}

Field control_v(const BilinearWorkspace<double>& ws, double t, const Field& zl, const Field& zh,
                const Field& X, const Field& z, const PhysicsParams& params,
                const NoiseOperator& noise, ControlOptions options) {
  X.require_same(zl);
  X.require_same(zh);
  X.require_same(z);
  const int N0 = params.N0;
  if (!in_control_window(t)) {
    return noise.apply_inverse(low_pass(N0, bilinear_B(ws, zh, zh) + bilinear_B_tilde(ws, zh, X)));
  }
  const Field Z = zl + zh;
  const Field zlow = low_pass(N0, z);
  const double c = control_coefficient(params, options);
  Field r = -zlow + ((1.0 - t) * c) * stokes_apply(1.0, zlow) +
            low_pass(N0, bilinear_B(ws, Z, Z) + bilinear_B_tilde(ws, Z, X));
  return noise.apply_inverse(r);
}

Field control_v_y_form(const BilinearWorkspace<double>& ws, double t, const Field& zl,
                       const Field& zh, const Field& Y, const Field& z,
                       const PhysicsParams& params, const NoiseOperator& noise,
                       ControlOptions options) {
  Y.require_same(zl);
  Y.require_same(zh);
  Y.require_same(z);
  const int N0 = params.N0;
  if (!in_control_window(t)) {
    return noise.apply_inverse(
        low_pass(N0, bilinear_B_tilde(ws, zh, Y) - bilinear_B(ws, zh, zh)));
  }
  const Field Z = zl + zh;
  const Field zlow = low_pass(N0, z);
  const double c = control_coefficient(params, options);
  Field r = -zlow + ((1.0 - t) * c) * stokes_apply(1.0, zlow) +
            low_pass(N0, bilinear_B_tilde(ws, Z, Y) - bilinear_B(ws, Z, Z));
  return noise.apply_inverse(r);
}

CoupledStepper::CoupledStepper(const ExponentialEuler& stepper, const NoiseOperator& noise,
                               ControlOptions control, const Field& x0, const Field& y0)
    : stepper_(stepper), noise_(noise), control_(control) {
  x0.require_same(y0);
  require_workspace(stepper_.workspace(), x0);
  if (!(*noise_.grid_ptr() == x0.grid())) throw std::invalid_argument("CoupledStepper: grid mismatch");
  const PhysicsParams& params = stepper_.params();
  if (noise_.N0() != params.N0) throw std::invalid_argument("CoupledStepper: N0 mismatch");
  if (!noise_.invertible_on_low()) {
    throw std::domain_error("CoupledStepper: Q is not invertible on the low modes");
  }
  const auto& grid = x0.grid();
  const double r2 = double(params.N0) * params.N0;
  const Index n = grid.size();
  low_mask_ = (grid.k2() <= r2).cast<double>();
  q_inv_ = Eigen::ArrayXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (low_mask_[i] > 0.0) q_inv_[i] = 1.0 / noise_.q()[i];
  }
  control_stokes_ = control_coefficient(params, control_) * grid.k2() * low_mask_;

  const Field z = y0 - x0;
  z_low_ = z.amps().array() * low_mask_.cast<std::complex<double>>();
  x_ = x0.amps();
  zh_ = z.amps().array() * (1.0 - low_mask_).cast<std::complex<double>>();
  v_ = Coefficients::Zero(n);
  set_zl(0);
  check_finite(x_, 0.0, stepper_.options().blowup_norm);
  sup_zh_ = std::sqrt(2.0 * zh_.squaredNorm());
}

bool CoupledStepper::before_one(int n) const { return in_control_window(n * stepper_.dt()); }

void CoupledStepper::set_zl(int n) {
  if (before_one(n)) {
    zl_ = (1.0 - n * stepper_.dt()) * z_low_;
  } else {
    zl_.setZero(z_low_.size());
  }
}

void CoupledStepper::advance(PathRng& rng) {
  wiener_increment(noise_, stepper_.dt(), rng, qdw_);
  advance(qdw_);
}

void CoupledStepper::advance(const Coefficients& qdw) {
  const double dt = stepper_.dt();
  const double t = n_ * dt;
  const auto& ws = stepper_.workspace();
  const bool window = before_one(n_);

  // In the window Z = zl + zh drives the control; afterwards zl = 0 and only
  // zh remains, so the same coupled kernel covers both branches.
  const Coefficients zsum = zl_ + zh_;
  if (stepper_.options().nonlinear) {
    ws.apply_coupled(x_, zsum, bxx_, bz_);
  } else {
    bxx_.setZero(x_.size());
    bz_.setZero(x_.size());
  }

  auto r = (bz_.array() * low_mask_.cast<std::complex<double>>()).eval();
  if (window) {
    r += -z_low_.array() + (1.0 - t) * control_stokes_.cast<std::complex<double>>() * z_low_.array();
  }
  v_ = r * q_inv_.cast<std::complex<double>>();

  // <v, Q^{-1} Q dW> with the real inner product 2 sum Re(conj(v) w).
  const double dot =
      2.0 * (v_.conjugate().array() * qdw.array() * q_inv_.cast<std::complex<double>>()).real().sum();
  const double v2 = 2.0 * v_.squaredNorm();
  log_m_ -= dot + 0.5 * v2 * dt;
  v_energy_ += v2 * dt;

  const auto decay = stepper_.decay().cast<std::complex<double>>();
  x_ = decay * (x_.array() - dt * bxx_.array() + qdw.array());
  zh_ = decay * (zh_.array() - dt * bz_.array()) * (1.0 - low_mask_).cast<std::complex<double>>();
  ++n_;
  set_zl(n_);

  const double t_next = n_ * dt;
  check_finite(x_, t_next, stepper_.options().blowup_norm);
  check_finite(zh_, t_next, stepper_.options().blowup_norm);
  if (!std::isfinite(log_m_)) throw BlowUpError(t_next, "non-finite Girsanov density");
  if (t_next <= 1.0 + kUnitTol) sup_zh_ = std::max(sup_zh_, std::sqrt(2.0 * zh_.squaredNorm()));
}

CouplingTrajectory run_coupled(const BilinearWorkspace<double>& ws, const Field& x0,
                               const Field& y0, double T, double dt, const PhysicsParams& params,
                               const NoiseOperator& noise, std::uint64_t seed,
                               CouplingOptions options) {
  const int M = step_count(T, dt);
  ExponentialEuler stepper(ws, params, dt, options.step);
  CoupledStepper cs(stepper, noise, options.control, x0, y0);
  PathRng rng(seed, std::uint64_t(Stream::single), 0);
  const auto grid = x0.grid_ptr();

  CouplingTrajectory traj;
  traj.x0 = x0;
  traj.y0 = y0;
  traj.x_path.nu = params.nu;
  const auto h1 = [&](const Field::Coefficients& a) {
    return 2.0 * (grid->k2() * a.array().abs2()).sum();
  };
  double diss = 0.0;
  double h1_prev = h1(cs.x());
  const auto record = [&](double t) {
    traj.x_path.times.push_back(t);
    traj.x_path.states.emplace_back(grid, cs.x());
    traj.x_path.dissipation.push_back(diss);
    traj.zl.emplace_back(grid, cs.zl());
    traj.zh.emplace_back(grid, cs.zh());
    traj.log_m.push_back(cs.log_density());
    traj.v_energy.push_back(cs.control_energy());
  };
  record(0.0);
  Field::Coefficients qdw;
  for (int n = 0; n < M; ++n) {
    wiener_increment(noise, dt, rng, qdw);
    cs.advance(qdw);
    traj.v.emplace_back(grid, cs.last_control());
    traj.x_path.increments.emplace_back(grid, qdw);
    const double h = h1(cs.x());
    diss += params.nu * 0.5 * dt * (h1_prev + h);
    h1_prev = h;
    record((n + 1) * dt);
  }
  // Control at the final node, for a full-length series.
  const Field xl(grid, cs.x());
  traj.v.push_back(control_v(ws, T, traj.zl.back(), traj.zh.back(), xl, y0 - x0, params, noise,
                             options.control));
  return traj;
}

void write_trajectory_csv(std::ostream& os, const CouplingTrajectory& traj) {
  os << "t,zl_norm,zh_norm2,v_norm2,log_m,v_energy\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.x_path.times.size(); ++i) {
    os << traj.x_path.times[i] << ',' << norm(traj.zl[i]) << ',' << norm_squared(traj.zh[i]) << ','
       << norm_squared(traj.v[i]) << ',' << traj.log_m[i] << ',' << traj.v_energy[i] << '\n';
  }
}

}  // namespace sns
