#include "sns/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>

namespace sns {

namespace {

constexpr double kPi = std::numbers::pi;

Hypothesis strict(std::string name, std::string condition, double lhs, double rhs) {
  return {std::move(name), std::move(condition), lhs, rhs, lhs > rhs};
}

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log of the bracket [(1 + C1 N0^3 + nu N0^2/4)^p + p! (C2^2/(4nu) + C1 N0^3/2)^p (C2^2 p/(4nu))^{-p}].
double log_kp_bracket(int p, const BoundConstants& c) {
  const double n0 = c.N0;
  const double n03 = n0 * n0 * n0;
  const double first = p * std::log(1.0 + c.C1 * n03 + c.nu * n0 * n0 / 4.0);
  const double a = c.C2 * c.C2 / (4.0 * c.nu);
  const double second =
      std::lgamma(p + 1.0) + p * std::log(a + c.C1 * n03 / 2.0) - p * std::log(a * p);
  return log_add_exp(first, second);
}

// Normalized gradient ascent on log ratio, one start.
struct Triple {
  Field x, y, z;
};

double log_ratio(const BilinearWorkspace<double>& ws, const Triple& t) {
  const double r = c2_ratio(ws, t.x, t.y, t.z);
  return r > 0.0 ? std::log(r) : -std::numeric_limits<double>::infinity();
}

void normalize(Field& u) {
  const double n = norm(u);
  if (n > 0.0) u *= 1.0 / n;
}

Triple ascend(const BilinearWorkspace<double>& ws, Triple t, int iterations) {
  normalize(t.x);
  normalize(t.y);
  normalize(t.z);
  double current = log_ratio(ws, t);
  if (!std::isfinite(current)) return t;
  double step = 0.1;
  for (int it = 0; it < iterations; ++it) {
    const double F = inner(t.x, bilinear_B(ws, t.y, t.z));
    const Field Ax = stokes_apply(1.0, t.x);
    const Field Ay = stokes_apply(1.0, t.y);
    const Field Az = stokes_apply(1.0, t.z);
    const Field gx = (1.0 / F) * bilinear_B(ws, t.y, t.z) - (0.5 / norm_squared(t.x)) * t.x -
                     (0.5 / inner(t.x, Ax)) * Ax;
    const Field gy = (1.0 / F) * Field(t.y.grid_ptr(), ws.adjoint_first(t.x.amps(), t.z.amps())) -
                     (0.5 / norm_squared(t.y)) * t.y - (0.5 / inner(t.y, Ay)) * Ay;
    const Field gz = (-1.0 / F) * bilinear_B(ws, t.y, t.x) - (1.0 / inner(t.z, Az)) * Az;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Triple next{t.x + step * gx, t.y + step * gy, t.z + step * gz};
      normalize(next.x);
      normalize(next.y);
      normalize(next.z);
      const double value = log_ratio(ws, next);
      if (value > current) {
        t = std::move(next);
        current = value;
        step *= 1.5;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return t;
}

// Embeds a field from a smaller grid by wavevector.
Field embed(const Field& u, const GridPtr& grid) {
  Field out(grid);
  for (Index i = 0; i < u.size(); ++i) {
    out.amps()[grid->locate(u.grid().mode(i))->half] = u.amps()[i];
  }
  return out;
}

Field random_start(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> decay(0.0, 2.0);
  const double s = decay(rng);
  Field u(grid);
  for (Index i = 0; i < u.size(); ++i) {
    u.amps()[i] = std::pow(grid->k2()[i], -0.5 * s) * std::complex<double>(g(rng), g(rng));
  }
  return u;
}

}  // namespace

bool HypothesisReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const Hypothesis& h) { return h.pass; });
}

const Hypothesis& HypothesisReport::at(const std::string& name) const {
  for (const auto& h : items) {
    if (h.name == name) return h;
  }
  throw std::out_of_range("unknown hypothesis: " + name);
}

const Hypothesis* HypothesisReport::first_failure(const std::vector<std::string>& names) const {
  for (const auto& n : names) {
    const Hypothesis& h = at(n);
    if (!h.pass) return &h;
  }
  return nullptr;
}

HypothesisError::HypothesisError(const Hypothesis& h)
    : std::runtime_error("hypothesis " + h.name + " fails: " + h.condition + " (" +
                         std::to_string(h.lhs) + " vs " + std::to_string(h.rhs) + ")"),
      h_(h) {}

double lattice_sum_inverse_fourth(int R) {
  double s = 0.0;
  const long r2 = long(R) * R;
  // Sum shells of increasing |k| so small terms are added last.
  std::vector<long> norms;
  for (int a = -R; a <= R; ++a) {
    for (int b = -R; b <= R; ++b) {
      const long n2 = long(a) * a + long(b) * b;
      if (n2 > 0 && n2 <= r2) norms.push_back(n2);
    }
  }
  std::sort(norms.begin(), norms.end(), std::greater<>());
  for (long n2 : norms) s += 1.0 / (double(n2) * double(n2));
  return s;
}

double constant_C1(const SpectralGrid& grid, int R) {
  const int r = std::max(R, grid.N());
  return std::sqrt(lattice_sum_inverse_fourth(r) + lattice_tail_bound(r)) / (2.0 * kPi);
}

double c2_ratio(const BilinearWorkspace<double>& ws, const Field& x, const Field& y, const Field& z) {
  const double num = std::abs(inner(x, bilinear_B(ws, y, z)));
  if (num == 0.0) return 0.0;
  const double den = std::sqrt(norm(x) * sobolev_norm(0.5, x) * norm(y) * sobolev_norm(0.5, y)) *
                     sobolev_norm(0.5, z);
  return num / den;
}

C2Search maximize_c2_ratio(const BilinearWorkspace<double>& ws, const C2Options& options,
                           const C2Search* warm_start) {
  const GridPtr& grid = ws.grid_ptr();
  std::mt19937_64 rng(options.seed + 7919u * std::uint64_t(grid->N()));
  C2Search best;
  best.x = best.y = best.z = Field::zero(grid);
  const auto consider = [&](Triple t) {
    Triple r = ascend(ws, std::move(t), options.iterations);
    const double value = c2_ratio(ws, r.x, r.y, r.z);
    if (value > best.ratio) {
      best.ratio = value;
      best.x = std::move(r.x);
      best.y = std::move(r.y);
      best.z = std::move(r.z);
    }
  };
  if (warm_start && warm_start->ratio > 0.0) {
    consider({embed(warm_start->x, grid), embed(warm_start->y, grid), embed(warm_start->z, grid)});
  }
  for (int r = 0; r < options.restarts; ++r) {
    Triple t{random_start(grid, rng), random_start(grid, rng), random_start(grid, rng)};
    consider(std::move(t));
  }
  return best;
}

double constant_C2(const SpectralGrid& grid, const C2Options& options) {
  static std::mutex mutex;
  static std::map<int, double> cache;
  const C2Options defaults;
  const bool cacheable = options.restarts == defaults.restarts &&
                         options.iterations == defaults.iterations &&
                         options.safety == defaults.safety && options.seed == defaults.seed;
  if (cacheable) {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(grid.N()); it != cache.end()) return it->second;
  }
  C2Search previous;
  double sup = 0.0;
  for (int n = 1; n <= grid.N(); ++n) {
    const BilinearWorkspace<double> ws(SpectralGrid::make(n));
    C2Search found = maximize_c2_ratio(ws, options, n > 1 ? &previous : nullptr);
    // The warm start keeps the sequence nondecreasing in n.
    sup = std::max(sup, found.ratio);
    if (found.ratio >= previous.ratio) previous = std::move(found);
  }
  const double value = options.safety * sup;
  if (cacheable) {
    std::lock_guard lock(mutex);
    cache[grid.N()] = value;
  }
  return value;
}

BoundConstants make_constants(const SpectralGrid& grid, const PhysicsParams& params,
                              const NoiseOperator& noise, const C2Options& c2) {
  validate(params, grid);
  if (noise.N0() != params.N0) throw std::invalid_argument("make_constants: N0 mismatch");
  BoundConstants c;
  c.nu = params.nu;
  c.N0 = params.N0;
  c.C0 = noise.c0();
  c.C1 = constant_C1(grid);
  c.C2 = constant_C2(grid, c2);
  c.trQQ = noise.trace_qq();
  return c;
}

HypothesisReport hypothesis_report(const BoundConstants& c, const std::vector<int>& p_list) {
  HypothesisReport r;
  const double n02 = double(c.N0) * c.N0;
  r.items.push_back(strict("noise_invertible", "min q_k > 0 on |k| <= N0",
                           std::isfinite(c.C0) && c.C0 > 0.0 ? 1.0 / c.C0 : 0.0, 0.0));
  r.items.push_back(strict("exp_moment_viscosity", "nu > 2 trQQ", c.nu, 2.0 * c.trQQ));
  std::set<int> ps(p_list.begin(), p_list.end());
  ps.insert({1, 2});
  for (int p : ps) {
    if (p < 1) throw std::invalid_argument("hypothesis_report: p must be >= 1");
    r.items.push_back(strict("zh_decay_viscosity_p" + std::to_string(p),
                             "nu > max(C2 sqrt(p/2), 2 trQQ)", c.nu,
                             std::max(c.C2 * std::sqrt(p / 2.0), 2.0 * c.trQQ)));
  }
  r.items.push_back(strict("mlh_spectral_gap", "nu N0^2 > trQQ / 2", c.nu * n02, 0.5 * c.trQQ));
  r.items.push_back(strict("mlh_viscosity", "nu > max(trQQ, C2)", c.nu, std::max(c.trQQ, c.C2)));
  r.items.push_back(strict("l_denominators", "2 nu N0^2 > trQQ", 2.0 * c.nu * n02, c.trQQ));
  return r;
}

std::vector<std::string> exp_moment_hypotheses() { return {"exp_moment_viscosity"}; }

std::vector<std::string> zh_moment_hypotheses(int p) {
  return {"noise_invertible", "zh_decay_viscosity_p" + std::to_string(p)};
}

std::vector<std::string> mlh_hypotheses() {
  return {"noise_invertible",     "mlh_spectral_gap", "mlh_viscosity",
          "zh_decay_viscosity_p1", "zh_decay_viscosity_p2", "l_denominators"};
}

void require(const HypothesisReport& report, const std::vector<std::string>& names) {
  if (const Hypothesis* h = report.first_failure(names)) throw HypothesisError(*h);
}

double log_kp_constant(int p, double z_norm, const BoundConstants& c) {
  if (p < 1) throw std::invalid_argument("kp_constant: p must be >= 1");
  if (!(z_norm >= 0.0)) throw std::invalid_argument("kp_constant: z_norm must be >= 0");
  require(hypothesis_report(c, {p}), {"zh_decay_viscosity_p" + std::to_string(p)});
  const double n0 = c.N0;
  const double exponent = c.C1 * p * n0 * n0 * (z_norm * z_norm + z_norm) +
                          c.C1 * p * n0 * n0 * n0 / 2.0 + c.trQQ;
  return (p - 1) * std::log(2.0) + exponent + log_kp_bracket(p, c);
}

double kp_constant(int p, double z_norm, const BoundConstants& c) {
  return std::exp(log_kp_constant(p, z_norm, c));
}

double zh_envelope_rate(int p, const BoundConstants& c) {
  return 2.0 * c.nu * p * c.N0 * c.N0 - c.trQQ;
}

double log_zh_sup_envelope(int p, double x_norm, double z_norm, const BoundConstants& c) {
  return log_kp_constant(p, z_norm, c) + x_norm * x_norm + 2.0 * p * std::log(z_norm);
}

double log_zh_envelope(int p, double t, double x_norm, double z_norm, const BoundConstants& c) {
  return -zh_envelope_rate(p, c) * t + log_kp_constant(p, z_norm, c) + 2.0 * x_norm * x_norm +
         2.0 * c.nu * p * c.N0 * c.N0 + 2.0 * p * std::log(z_norm);
}

LConstants l_constants(double y_norm, double z_norm, const BoundConstants& c) {
  require(hypothesis_report(c, {2}), {"l_denominators"});
  const double n02 = double(c.N0) * c.N0;
  const double n04 = n02 * n02;
  const double n06 = n04 * n02;
  const double y2 = y_norm * y_norm;
  const double C0sq = c.C0 * c.C0;
  const double C1sq = c.C1 * c.C1;
  LConstants L;
  L.K2 = kp_constant(2, z_norm, c);
  const double k2y = 1.0 + L.K2 * std::exp(y2);
  L.L1 = 24.0 * C0sq * C1sq * n06 * k2y;
  L.L2 = 3.0 * C0sq *
         (4.0 * n04 + 4.0 * std::sqrt(2.0) * C1sq * n06 * std::sqrt(k2y) * std::exp((y2 + c.trQQ) / 2.0));
  L.L3 = 2.0 * C0sq * C1sq * n06 * std::exp(2.0 * y2 + 4.0 * c.nu * n02) * L.K2 /
         (4.0 * c.nu * n02 - c.trQQ);
  L.L4 = 4.0 * C0sq * C1sq * n06 * std::sqrt(2.0 * L.K2) * std::exp(1.5 * y2 + 2.0 * c.nu * n02) /
         (2.0 * c.nu * n02 - c.trQQ);
  return L;
}

double control_energy_bound(double y_norm, double z_norm, const BoundConstants& c) {
  const LConstants L = l_constants(y_norm, z_norm, c);
  const double z2 = z_norm * z_norm;
  return (L.L1 + L.L3) * z2 * z2 + (L.L2 + L.L4) * z2;
}

MlhConstants mlh_constants(double y_norm, double z_norm, const BoundConstants& c) {
  require(hypothesis_report(c, {1, 2}), mlh_hypotheses());
  MlhConstants m;
  m.L = l_constants(y_norm, z_norm, c);
  m.K1 = kp_constant(1, z_norm, c);
  m.C = 0.5 * std::max(m.L.L1 + m.L.L3, m.L.L2 + m.L.L4);
  m.C_tilde = std::exp(y_norm * y_norm + c.nu * c.N0 * c.N0) * std::sqrt(m.K1);
  m.delta_rate = c.delta_rate();
  return m;
}

double mlh_rhs(double logPtf_x, double z_norm, double dlogf_sup, double t, double y_norm,
               const BoundConstants& c, double scale) {
  if (!(t >= 0.0)) throw std::invalid_argument("mlh_rhs: t must be >= 0");
  if (!(dlogf_sup >= 0.0)) throw std::invalid_argument("mlh_rhs: dlogf_sup must be >= 0");
  const MlhConstants m = mlh_constants(y_norm, z_norm, c);
  const double z2 = z_norm * z_norm;
  const double quartic = 0.5 * (m.L.L1 + m.L.L3) * z2 * z2;
  const double quadratic = 0.5 * (m.L.L2 + m.L.L4) * z2;
  const double drift = std::exp(-c.delta_rate() * t + y_norm * y_norm + c.nu * c.N0 * c.N0) *
                       std::sqrt(m.K1) * z_norm * dlogf_sup;
  return logPtf_x + scale * (quartic + quadratic + drift);
}

}  // namespace sns
