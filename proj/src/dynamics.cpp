#include "sns/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace sns {

NoiseOperator::NoiseOperator(GridPtr grid, int N0, Eigen::ArrayXd q)
    : grid_(std::move(grid)), N0_(N0), q_(std::move(q)) {
  if (N0_ < 1 || N0_ > grid_->N()) throw std::invalid_argument("NoiseOperator: bad N0");
  if (q_.size() != grid_->size()) throw std::invalid_argument("NoiseOperator: size mismatch");
  const double r2 = double(N0_) * N0_;
  q_inv_ = Eigen::ArrayXd::Zero(q_.size());
  c0_ = 0.0;
  for (Index i = 0; i < q_.size(); ++i) {
    if (!(q_[i] >= 0.0) || !std::isfinite(q_[i])) {
      throw std::invalid_argument("NoiseOperator: amplitudes must be finite and nonnegative");
    }
    if (grid_->k2()[i] > r2) {
      if (q_[i] != 0.0) throw std::invalid_argument("NoiseOperator: forcing above N0");
      continue;
    }
    if (q_[i] > 0.0) {
      q_inv_[i] = 1.0 / q_[i];
      c0_ = std::max(c0_, q_inv_[i]);
    } else {
      c0_ = std::numeric_limits<double>::infinity();
    }
  }
  trace_ = 2.0 * q_.square().sum();
}

NoiseOperator NoiseOperator::uniform(GridPtr grid, int N0, double q) {
  Eigen::ArrayXd amps = Eigen::ArrayXd::Zero(grid->size());
  const double r2 = double(N0) * N0;
  for (Index i = 0; i < grid->size(); ++i) {
    if (grid->k2()[i] <= r2) amps[i] = q;
  }
  return NoiseOperator(std::move(grid), N0, std::move(amps));
}

Field NoiseOperator::apply(const Field& x) const {
  Field out(x.grid_ptr());
  out.amps() = x.amps().array() * q_.cast<std::complex<double>>();
  return out;
}

Field NoiseOperator::apply_inverse(const Field& x) const {
  if (!invertible_on_low()) throw std::domain_error("NoiseOperator: Q is not invertible on H^l");
  Field out(x.grid_ptr());
  out.amps() = x.amps().array() * q_inv_.cast<std::complex<double>>();
  return out;
}

PathRng::PathRng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t path) {
  std::seed_seq seq{std::uint32_t(master_seed), std::uint32_t(master_seed >> 32),
                    std::uint32_t(stream),      std::uint32_t(stream >> 32),
                    std::uint32_t(path),        std::uint32_t(path >> 32)};
  engine_.seed(seq);
}

void wiener_increment(const NoiseOperator& noise, double dt, PathRng& rng,
                      Field::Coefficients& out) {
  if (!(dt > 0.0)) throw std::invalid_argument("wiener_increment: dt must be positive");
  const auto& grid = *noise.grid_ptr();
  const double r2 = double(noise.N0()) * noise.N0();
  const double scale = std::sqrt(0.5 * dt);
  out.setZero(grid.size());
  // Low modes are the leading block of the (|k|^2, k1, k2) ordering.
  for (Index i = 0; i < grid.size() && grid.k2()[i] <= r2; ++i) {
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    out[i] = noise.q()[i] * scale * std::complex<double>(g1, g2);
  }
}

Field wiener_increment(const NoiseOperator& noise, double dt, PathRng& rng) {
  Field out(noise.grid_ptr());
  wiener_increment(noise, dt, rng, out.amps());
  return out;
}

ExponentialEuler::ExponentialEuler(const BilinearWorkspace<double>& ws,
                                   const PhysicsParams& params, double dt, StepOptions options)
    : ws_(ws), params_(params), dt_(dt), options_(options) {
  validate(params_, ws_.grid());
  if (!(dt_ > 0.0)) throw std::invalid_argument("ExponentialEuler: dt must be positive");
  decay_ = (-params_.nu * dt_ * ws_.grid().k2()).exp();
}

void check_finite(const Field::Coefficients& x, double time, double guard) {
  const double n2 = 2.0 * x.squaredNorm();
  if (!std::isfinite(n2)) throw BlowUpError(time, "non-finite state");
  if (n2 > guard * guard) throw BlowUpError(time, "state norm exceeded blow-up guard");
}

void ExponentialEuler::step(Field::Coefficients& x, const Field::Coefficients& dW,
                            double time) const {
  if (options_.nonlinear) {
    thread_local Field::Coefficients b;
    ws_.apply_symmetric(x, b);
    x = decay_.cast<std::complex<double>>() * (x.array() - dt_ * b.array() + dW.array());
  } else {
    x = decay_.cast<std::complex<double>>() * (x.array() + dW.array());
  }
  check_finite(x, time + dt_, options_.blowup_norm);
}

Field step_exponential_euler(const BilinearWorkspace<double>& ws, const Field& X, const Field& dW,
                             double dt, const PhysicsParams& params, StepOptions options) {
  X.require_same(dW);
  require_workspace(ws, X);
  check_finite(X.amps(), 0.0, std::numeric_limits<double>::infinity());
  ExponentialEuler stepper(ws, params, dt, options);
  Field out = X;
  stepper.step(out.amps(), dW.amps(), 0.0);
  return out;
}

int step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("step_count: T and dt must be positive");
  const double ratio = T / dt;
  const double m = std::round(ratio);
  if (m < 1.0 || std::abs(ratio - m) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("step_count: dt must divide T");
  }
  return static_cast<int>(m);
}

std::size_t SdePath::node(double t) const {
  if (times.empty()) throw std::invalid_argument("SdePath: empty path");
  const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
  const double pos = (t - times.front()) / dt;
  const double idx = std::round(pos);
  if (idx < 0 || idx >= double(times.size()) || std::abs(pos - idx) > 1e-9 * std::max(1.0, pos)) {
    throw std::invalid_argument("SdePath: time is not on the grid");
  }
  return static_cast<std::size_t>(idx);
}

SdePath simulate_x(const BilinearWorkspace<double>& ws, const Field& x0, double T, double dt,
                   const PhysicsParams& params, const NoiseOperator& noise, std::uint64_t seed,
                   StepOptions options) {
  require_workspace(ws, x0);
  const int M = step_count(T, dt);
  ExponentialEuler stepper(ws, params, dt, options);
  PathRng rng(seed, std::uint64_t(Stream::single), 0);

  SdePath path;
  path.nu = params.nu;
  path.times.reserve(std::size_t(M) + 1);
  path.states.reserve(std::size_t(M) + 1);
  path.increments.reserve(std::size_t(M));
  path.dissipation.reserve(std::size_t(M) + 1);

  check_finite(x0.amps(), 0.0, options.blowup_norm);
  Field x = x0;
  double h1_prev = std::pow(sobolev_norm(0.5, x), 2);
  double diss = 0.0;
  path.times.push_back(0.0);
  path.states.push_back(x);
  path.dissipation.push_back(0.0);
  for (int n = 0; n < M; ++n) {
    Field dW = wiener_increment(noise, dt, rng);
    stepper.step(x.amps(), dW.amps(), n * dt);
    const double h1 = std::pow(sobolev_norm(0.5, x), 2);
    diss += params.nu * 0.5 * dt * (h1_prev + h1);
    h1_prev = h1;
    path.times.push_back((n + 1) * dt);
    path.states.push_back(x);
    path.dissipation.push_back(diss);
    path.increments.push_back(std::move(dW));
  }
  return path;
}

double energy_functional(const SdePath& path, double t) {
  const std::size_t i = path.node(t);
  return norm_squared(path.states[i]) + path.dissipation[i];
}

void write_path_csv(std::ostream& os, const SdePath& path) {
  os << "t,norm2,h1_norm2,dissipation\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    os << path.times[i] << ',' << norm_squared(path.states[i]) << ','
       << std::pow(sobolev_norm(0.5, path.states[i]), 2) << ',' << path.dissipation[i] << '\n';
  }
}

}  // namespace sns
