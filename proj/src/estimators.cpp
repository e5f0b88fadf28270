#include "sns/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace sns {

namespace {

using Coefficients = Field::Coefficients;

constexpr double kSigmas = 3.0;
constexpr double kMinEffectiveSamples = 10.0;

// Runs body(path) for every path, possibly in parallel. If any path throws,
// the exception of the lowest failing index is rethrown.
template <typename Body>
void for_each_path(long n_paths, Body&& body) {
  std::atomic<bool> failed{false};
  std::mutex mu;
  long first_bad = n_paths;
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 8)
  for (long path = 0; path < n_paths; ++path) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      body(path);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      failed = true;
      if (path < first_bad) {
        first_bad = path;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

void require_paths(const SimConfig& cfg) {
  if (cfg.n_paths < 2) throw std::invalid_argument("estimator: n_paths must be >= 2");
}

double h1_norm2(const SpectralGrid& grid, const Coefficients& a) {
  return 2.0 * (grid.k2() * a.array().abs2()).sum();
}

double log_norm_coeffs(const Coefficients& a) {
  const double peak = a.cwiseAbs().maxCoeff();
  if (peak == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(peak) + 0.5 * std::log(2.0 * (a / peak).squaredNorm());
}

// Calls emit(node) for every requested node equal to step n, in order.
struct NodeCursor {
  const std::vector<int>& nodes;
  std::size_t next = 0;

  template <typename Emit>
  void visit(int n, Emit&& emit) {
    while (next < nodes.size() && nodes[next] == n) emit(next++);
  }
};

std::vector<double> row(const std::vector<double>& data, std::size_t r, long n) {
  const auto begin = data.begin() + static_cast<std::ptrdiff_t>(r * std::size_t(n));
  return {begin, begin + n};
}

Field unit_direction(const Field& h) {
  const double n = norm(h);
  if (!(n > 0.0)) throw std::invalid_argument("gradient_probe: zero direction");
  return (1.0 / n) * h;
}

Estimate abs_estimate(Estimate e) {
  if (e.mean < 0.0) {
    e.mean = -e.mean;
    std::swap(e.ci_lo, e.ci_hi);
    e.ci_lo = -e.ci_lo;
    e.ci_hi = -e.ci_hi;
  }
  return e;
}

}  // namespace

Model::Model(GridPtr grid_, PhysicsParams params_, NoiseOperator noise_)
    : grid(std::move(grid_)),
      ws(std::make_shared<const BilinearWorkspace<double>>(grid)),
      params(params_),
      noise(std::move(noise_)) {
  validate(params, *grid);
  if (!noise.grid_ptr() || !(*noise.grid_ptr() == *grid)) {
    throw std::invalid_argument("Model: noise grid does not match");
  }
  if (noise.N0() != params.N0) throw std::invalid_argument("Model: noise N0 does not match physics N0");
}

Model Model::uniform(int N, double nu, int N0, double q) {
  auto grid = SpectralGrid::make(N);
  return Model(grid, PhysicsParams{nu, N0}, NoiseOperator::uniform(grid, N0, q));
}

BoundConstants Model::constants(const C2Options& c2) const {
  return make_constants(*grid, params, noise, c2);
}

std::vector<int> time_nodes(std::span<const double> times, double dt) {
  std::vector<int> nodes;
  nodes.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("time_nodes: times must be >= 0");
    const int n = t == 0.0 ? 0 : step_count(t, dt);
    if (!nodes.empty() && n < nodes.back()) {
      throw std::invalid_argument("time_nodes: times must be nondecreasing");
    }
    nodes.push_back(n);
  }
  return nodes;
}

void run_plain_ensemble(const Model& m, const Field& x0, std::span<const double> times,
                        const SimConfig& cfg, Stream stream, const PlainObserver& observe) {
  require_workspace(*m.ws, x0);
  const auto nodes = time_nodes(times, cfg.dt);
  const int M = nodes.empty() ? 0 : nodes.back();
  const ExponentialEuler stepper(*m.ws, m.params, cfg.dt, cfg.step);
  check_finite(x0.amps(), 0.0, cfg.step.blowup_norm);
  const SpectralGrid& grid = *m.grid;

  for_each_path(cfg.n_paths, [&](long path) {
    PathRng rng(cfg.seed, std::uint64_t(stream), std::uint64_t(path));
    Coefficients x = x0.amps();
    Coefficients dw(x.size());
    double diss = 0.0;
    double h1_prev = h1_norm2(grid, x);
    NodeCursor cursor{nodes};
    cursor.visit(0, [&](std::size_t i) { observe(path, i, x, diss); });
    for (int n = 0; n < M; ++n) {
      wiener_increment(m.noise, cfg.dt, rng, dw);
      stepper.step(x, dw, n * cfg.dt);
      const double h1 = h1_norm2(grid, x);
      diss += m.params.nu * 0.5 * cfg.dt * (h1_prev + h1);
      h1_prev = h1;
      cursor.visit(n + 1, [&](std::size_t i) { observe(path, i, x, diss); });
    }
  });
}

void run_synchronous_pairs(const Model& m, const Field& a0, const Field& b0,
                           std::span<const double> times, const SimConfig& cfg, Stream stream,
                           const PairObserver& observe) {
  require_workspace(*m.ws, a0);
  require_workspace(*m.ws, b0);
  const auto nodes = time_nodes(times, cfg.dt);
  const int M = nodes.empty() ? 0 : nodes.back();
  const ExponentialEuler stepper(*m.ws, m.params, cfg.dt, cfg.step);
  check_finite(a0.amps(), 0.0, cfg.step.blowup_norm);
  check_finite(b0.amps(), 0.0, cfg.step.blowup_norm);

  for_each_path(cfg.n_paths, [&](long path) {
    PathRng rng(cfg.seed, std::uint64_t(stream), std::uint64_t(path));
    Coefficients a = a0.amps();
    Coefficients b = b0.amps();
    Coefficients dw(a.size());
    NodeCursor cursor{nodes};
    cursor.visit(0, [&](std::size_t i) { observe(path, i, a, b); });
    for (int n = 0; n < M; ++n) {
      wiener_increment(m.noise, cfg.dt, rng, dw);
      stepper.step(a, dw, n * cfg.dt);
      stepper.step(b, dw, n * cfg.dt);
      cursor.visit(n + 1, [&](std::size_t i) { observe(path, i, a, b); });
    }
  });
}

void run_coupled_ensemble(const Model& m, const Field& x0, const Field& y0,
                          std::span<const double> times, const SimConfig& cfg,
                          const CoupledObserver& observe) {
  const auto nodes = time_nodes(times, cfg.dt);
  const int M = nodes.empty() ? 0 : nodes.back();
  const ExponentialEuler stepper(*m.ws, m.params, cfg.dt, cfg.step);
  // Validates the pair and the noise once before fanning out.
  { CoupledStepper probe(stepper, m.noise, cfg.control, x0, y0); }

  for_each_path(cfg.n_paths, [&](long path) {
    PathRng rng(cfg.seed, std::uint64_t(Stream::base), std::uint64_t(path));
    CoupledStepper s(stepper, m.noise, cfg.control, x0, y0);
    NodeCursor cursor{nodes};
    cursor.visit(0, [&](std::size_t i) { observe(path, i, s); });
    for (int n = 0; n < M; ++n) {
      s.advance(rng);
      cursor.visit(n + 1, [&](std::size_t i) { observe(path, i, s); });
    }
  });
}

void InequalityReport::finalize() {
  margin = rhs - lhs.mean;
  if (std_error > 0.0) {
    margin_sigmas = margin / std_error;
  } else {
    margin_sigmas = margin >= 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
  }
  pass = lhs.mean - kSigmas * std_error <= rhs;
}

std::vector<Estimate> semigroup_estimates(const Model& m, const TestFunction& f, const Field& x0,
                                          std::span<const double> times, const SimConfig& cfg,
                                          Stream stream) {
  require_paths(cfg);
  const long n = cfg.n_paths;
  std::vector<double> values(times.size() * std::size_t(n));
  run_plain_ensemble(m, x0, times, cfg, stream,
                     [&](long path, std::size_t i, const Coefficients& x, double) {
                       values[i * std::size_t(n) + std::size_t(path)] = f(x);
                     });
  std::vector<Estimate> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out.push_back(mean_estimate(row(values, i, n)));
  return out;
}

Estimate semigroup_estimate(const Model& m, const TestFunction& f, const Field& x0, double t,
                            const SimConfig& cfg) {
  const double times[] = {t};
  return semigroup_estimates(m, f, x0, times, cfg).front();
}

WeightedEstimate weighted_semigroup_estimate(const Model& m, const TestFunction& f,
                                             const Field& x0, const Field& y0, double t,
                                             const SimConfig& cfg) {
  require_paths(cfg);
  const std::size_t n = std::size_t(cfg.n_paths);
  std::vector<double> values(n), weights(n);
  const double times[] = {t};
  run_coupled_ensemble(m, x0, y0, times, cfg, [&](long path, std::size_t, const CoupledStepper& s) {
    const double w = std::exp(s.log_density());
    weights[std::size_t(path)] = w;
    values[std::size_t(path)] = w * f(s.y());
  });
  WeightedEstimate out;
  out.estimate = mean_estimate(values);
  out.weight_mean = mean_estimate(weights);
  out.n_eff = effective_sample_size(weights);
  out.weight_degenerate = out.n_eff < kMinEffectiveSamples;
  return out;
}

std::vector<EntropyEstimate> entropy_estimates(const Model& m, const Field& x0, const Field& y0,
                                               std::span<const double> times, const SimConfig& cfg) {
  require_paths(cfg);
  const BoundConstants c = m.constants();
  const std::size_t n = std::size_t(cfg.n_paths);
  const std::size_t nt = times.size();
  std::vector<double> energy(nt * n), mlogm(nt * n), weights(nt * n);
  run_coupled_ensemble(m, x0, y0, times, cfg, [&](long path, std::size_t i, const CoupledStepper& s) {
    const std::size_t slot = i * n + std::size_t(path);
    const double w = std::exp(s.log_density());
    weights[slot] = w;
    energy[slot] = w * 0.5 * s.control_energy();
    mlogm[slot] = w * s.log_density();
  });
  const double bound = 0.5 * control_energy_bound(norm(y0), norm(y0 - x0), c);
  std::vector<EntropyEstimate> out(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const auto slice = [&](const std::vector<double>& v) {
      return std::span<const double>(v).subspan(i * n, n);
    };
    EntropyEstimate& e = out[i];
    e.t = times[i];
    e.half_control_energy = mean_estimate(slice(energy));
    e.m_log_m = mean_estimate(slice(mlogm));
    e.n_eff = effective_sample_size(slice(weights));
    e.bound = bound;
    e.within_bound = e.half_control_energy.mean - kSigmas * e.half_control_energy.std_error <= bound;
    const double combined = std::hypot(e.half_control_energy.std_error, e.m_log_m.std_error);
    e.forms_agree = std::abs(e.half_control_energy.mean - e.m_log_m.mean) <= kSigmas * combined;
  }
  return out;
}

EntropyEstimate entropy_estimate(const Model& m, const Field& x0, const Field& y0, double t,
                                 const SimConfig& cfg) {
  const double times[] = {t};
  return entropy_estimates(m, x0, y0, times, cfg).front();
}

ZhDecayReport zh_moment_decay(const Model& m, int p, const Field& x0, const Field& y0,
                              std::span<const double> t_grid, const SimConfig& cfg) {
  require_paths(cfg);
  if (t_grid.size() < 3) throw std::invalid_argument("zh_moment_decay: need at least three grid points");
  for (double t : t_grid) {
    if (!(t > 1.0)) throw std::invalid_argument("zh_moment_decay: grid points must exceed 1");
  }
  const BoundConstants c = m.constants();
  require(hypothesis_report(c, {p}), zh_moment_hypotheses(p));

  const long n = cfg.n_paths;
  std::vector<double> logs(t_grid.size() * std::size_t(n));
  std::vector<double> sup_logs(static_cast<std::size_t>(n));
  const std::size_t last = t_grid.size() - 1;
  run_coupled_ensemble(m, x0, y0, t_grid, cfg, [&](long path, std::size_t i, const CoupledStepper& s) {
    logs[i * std::size_t(n) + std::size_t(path)] = 2.0 * p * log_norm_coeffs(s.zh());
    if (i == last) sup_logs[std::size_t(path)] = 2.0 * p * std::log(s.sup_zh_unit_interval());
  });

  ZhDecayReport out;
  out.p = p;
  out.z_norm = norm(y0 - x0);
  out.envelope_rate = -zh_envelope_rate(p, c);
  const double x_norm = norm(x0);
  const double ninf = -std::numeric_limits<double>::infinity();
  const auto all_zero = [&](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == ninf; });
  };
  out.identically_zero = all_zero(logs) && all_zero(sup_logs);

  // Pass rule mean - 3 se <= envelope, written in log space.
  const auto below = [](const LogMeanEstimate& e, double log_env) {
    const double shrink = 1.0 - kSigmas * e.relative_std_error;
    return shrink <= 0.0 || e.log_mean + std::log(shrink) <= log_env;
  };
  const auto estimate = [&](const std::vector<double>& v, std::uint64_t salt) {
    if (all_zero(v)) return LogMeanEstimate{ninf, ninf, ninf, 0.0, n};
    return log_mean_exp_estimate(v, cfg.bootstrap_resamples, cfg.seed ^ salt);
  };

  out.sup_moment = estimate(sup_logs, 0x5u);
  out.log_sup_envelope = log_zh_sup_envelope(p, x_norm, out.z_norm, c);
  out.sup_pass = out.identically_zero || below(out.sup_moment, out.log_sup_envelope);
  bool all_pass = out.sup_pass;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    ZhMomentPoint pt;
    pt.t = t_grid[i];
    pt.moment = estimate(row(logs, i, n), 0x100u + i);
    pt.log_envelope = log_zh_envelope(p, pt.t, x_norm, out.z_norm, c);
    pt.pass = out.identically_zero || below(pt.moment, pt.log_envelope);
    all_pass = all_pass && pt.pass;
    out.points.push_back(pt);
  }
  if (out.identically_zero) {
    out.pass = all_pass;
    return out;
  }

  // Weighted least squares of log moment on t, weights 1/rse^2.
  double sw = 0.0, st = 0.0, sl = 0.0;
  std::vector<double> w(out.points.size());
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const double rse = std::max(out.points[i].moment.relative_std_error, 1e-12);
    w[i] = 1.0 / (rse * rse);
    sw += w[i];
    st += w[i] * out.points[i].t;
    sl += w[i] * out.points[i].moment.log_mean;
  }
  const double tbar = st / sw, lbar = sl / sw;
  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const double dt = out.points[i].t - tbar;
    stt += w[i] * dt * dt;
    stl += w[i] * dt * (out.points[i].moment.log_mean - lbar);
  }
  out.fitted_rate = stl / stt;
  double rss = 0.0;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const double r = out.points[i].moment.log_mean - lbar - out.fitted_rate * (out.points[i].t - tbar);
    rss += w[i] * r * r;
  }
  out.fitted_rate_std_error = std::sqrt(rss / double(out.points.size() - 2) / stt);
  out.pass = all_pass && out.fitted_rate < 0.0;
  return out;
}

InequalityReport exp_moment_check(const Model& m, const Field& x0, double t, const SimConfig& cfg) {
  require_paths(cfg);
  const BoundConstants c = m.constants();
  require(hypothesis_report(c, {}), exp_moment_hypotheses());

  std::vector<double> energy(std::size_t(cfg.n_paths));
  const double times[] = {t};
  run_plain_ensemble(m, x0, times, cfg, Stream::base,
                     [&](long path, std::size_t, const Coefficients& x, double diss) {
                       energy[std::size_t(path)] = 2.0 * x.squaredNorm() + diss;
                     });
  const LogMeanEstimate e = log_mean_exp_estimate(energy, cfg.bootstrap_resamples, cfg.seed);

  InequalityReport r;
  r.name = "exp_moment";
  r.lhs.mean = std::exp(e.log_mean);
  r.lhs.std_error = e.relative_std_error * r.lhs.mean;
  r.lhs.n = e.n;
  r.lhs.ci_lo = std::exp(e.log_ci_lo);
  r.lhs.ci_hi = std::exp(e.log_ci_hi);
  const double log_rhs = norm_squared(x0) + c.trQQ * t;
  r.rhs = std::exp(log_rhs);
  r.std_error = r.lhs.std_error;
  r.inputs = {{"t", t},
              {"x_norm", norm(x0)},
              {"log_lhs", e.log_mean},
              {"log_rhs", log_rhs},
              {"nu", c.nu},
              {"trQQ", c.trQQ}};
  r.finalize();
  return r;
}

InequalityReport MlhCell::report(const BoundConstants& c, double scale) const {
  InequalityReport r;
  r.name = "mlh";
  r.lhs = lhs;
  const double log_ptf = std::log(ptf_x.mean);
  r.rhs = mlh_rhs(log_ptf, z_norm, dlogf_sup, t, y_norm, c, scale);
  r.rhs_std_error = ptf_x.std_error / ptf_x.mean;
  r.std_error = paired_std_error;
  r.inputs = {{"t", t},
              {"z_norm", z_norm},
              {"y_norm", y_norm},
              {"f_index", double(f_index)},
              {"dlogf_sup", dlogf_sup},
              {"log_ptf_x", log_ptf},
              {"scale", scale},
              {"n_eff", n_eff}};
  if (n_eff < kMinEffectiveSamples) r.warnings.push_back("effective sample size below 10");
  r.finalize();
  return r;
}

std::vector<MlhCell> mlh_cells(const Model& m, const std::vector<TestFunction>& fs,
                               const Field& x0, const Field& y0, std::span<const double> times,
                               const SimConfig& cfg) {
  require_paths(cfg);
  if (fs.empty()) throw std::invalid_argument("mlh_cells: no test functions");
  require(hypothesis_report(m.constants(), {1, 2}), mlh_hypotheses());

  const long n = cfg.n_paths;
  const std::size_t nf = fs.size();
  const std::size_t slots = times.size() * nf;
  std::vector<double> lhs(slots * std::size_t(n)), fx(slots * std::size_t(n));
  std::vector<double> weights(times.size() * std::size_t(n));
  run_coupled_ensemble(m, x0, y0, times, cfg, [&](long path, std::size_t i, const CoupledStepper& s) {
    const double w = std::exp(s.log_density());
    const Coefficients y = s.y();
    weights[i * std::size_t(n) + std::size_t(path)] = w;
    for (std::size_t j = 0; j < nf; ++j) {
      const std::size_t at = (i * nf + j) * std::size_t(n) + std::size_t(path);
      lhs[at] = w * std::log(fs[j](y));
      fx[at] = fs[j](s.x());
    }
  });

  std::vector<MlhCell> cells;
  const double z_norm = norm(y0 - x0);
  const double y_norm = norm(y0);
  std::vector<double> d(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double n_eff = effective_sample_size(row(weights, i, n));
    for (std::size_t j = 0; j < nf; ++j) {
      MlhCell cell;
      cell.f_index = j;
      cell.t = times[i];
      cell.z_norm = z_norm;
      cell.y_norm = y_norm;
      cell.dlogf_sup = fs[j].sup_DlogF();
      const auto a = row(lhs, i * nf + j, n);
      const auto b = row(fx, i * nf + j, n);
      cell.lhs = mean_estimate(a);
      cell.ptf_x = mean_estimate(b);
      // Delta method for lhs - log(mean f): per-path a_i - b_i / mean(b).
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = a[k] - b[k] / cell.ptf_x.mean;
      cell.paired_std_error = mean_estimate(d).std_error;
      cell.n_eff = n_eff;
      cells.push_back(cell);
    }
  }
  return cells;
}

InequalityReport mlh_check(const Model& m, const TestFunction& f, const Field& x0, const Field& y0,
                           double t, const SimConfig& cfg, double scale) {
  const double times[] = {t};
  const auto cells = mlh_cells(m, {f}, x0, y0, times, cfg);
  return cells.front().report(m.constants(), scale);
}

std::vector<ProbeCell> gradient_probe(const Model& m, const TestFunction& f, const Field& x0,
                                      const std::vector<Field>& directions,
                                      std::span<const double> times,
                                      std::span<const double> eps_list, const SimConfig& cfg) {
  require_paths(cfg);
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw std::invalid_argument("gradient_probe: eps must be positive");
  }
  const BoundConstants c = m.constants();
  const long n = cfg.n_paths;
  std::vector<ProbeCell> out;
  for (std::size_t h = 0; h < directions.size(); ++h) {
    const Field e = unit_direction(directions[h]);
    const double analytic = inner(f.gradient(x0), e);
    for (double eps : eps_list) {
      const Field x1 = x0 + eps * e;
      std::vector<double> q(times.size() * std::size_t(n));
      run_synchronous_pairs(m, x0, x1, times, cfg, Stream::synchronous,
                            [&](long path, std::size_t i, const Coefficients& a, const Coefficients& b) {
                              q[i * std::size_t(n) + std::size_t(path)] = (f(b) - f(a)) / eps;
                            });
      const double y_norm = std::max(norm(x0), norm(x1));
      const MlhConstants mc = mlh_constants(y_norm, eps, c);
      const double fixed =
          f.sup_f() * f.sup_f() +
          ((mc.L.L1 + mc.L.L3) * std::pow(eps, 4) + (mc.L.L2 + mc.L.L4) * eps * eps) / (2.0 * eps * eps);
      for (std::size_t i = 0; i < times.size(); ++i) {
        ProbeCell cell;
        cell.direction = h;
        cell.eps = eps;
        cell.t = times[i];
        cell.quotient = mean_estimate(row(q, i, n));
        cell.analytic = analytic;
        cell.envelope = fixed + 2.0 * std::exp(-mc.delta_rate * cell.t) * mc.C_tilde * f.sup_Df();
        cell.pass = std::abs(cell.quotient.mean) - kSigmas * cell.quotient.std_error <= cell.envelope;
        out.push_back(cell);
      }
    }
  }
  return out;
}

double dgamma(const Coefficients& x, const Coefficients& y, double gamma) {
  return std::min(1.0, std::sqrt(2.0 * (x - y).squaredNorm()) / gamma);
}

namespace {

struct DictionaryFunction {
  bool ramp = true;
  Coefficients center;
  Coefficients direction;  // ramps only
  Eigen::ArrayXd mask;     // distances only: 1 on the modes of pi_m

  double operator()(const Coefficients& u, double gamma) const {
    if (ramp) {
      const double r = 2.0 * (direction.conjugate().cwiseProduct(u - center)).real().sum() / gamma;
      return std::clamp(r, -0.5, 0.5);
    }
    const Coefficients diff = (u - center).array() * mask.cast<std::complex<double>>();
    return std::min(1.0, std::sqrt(2.0 * diff.squaredNorm()) / gamma);
  }
};

// Centers and directions move with the linear flow exp(-nu A t).
std::vector<DictionaryFunction> make_dictionary(const Model& m, const Field& x0, const Field& y0,
                                                double t, double gamma, int size) {
  const auto& grid = *m.grid;
  const Eigen::ArrayXcd flow = (-m.params.nu * t * grid.k2()).exp().cast<std::complex<double>>();
  const Coefficients mid = (0.5 * (x0.amps() + y0.amps())).array() * flow;
  Coefficients diff = (y0.amps() - x0.amps()).array() * flow;
  const double dn = std::sqrt(2.0 * diff.squaredNorm());
  if (dn > 0.0) {
    diff /= dn;
  } else {
    diff.setZero(grid.size());
    diff[0] = std::sqrt(0.5);
  }

  std::vector<DictionaryFunction> dict;
  const int ramps = (size + 1) / 2;
  for (int j = 0; j < ramps; ++j) {
    DictionaryFunction fn;
    fn.center = mid;
    if (j == 0) {
      fn.direction = diff;
    } else {
      // Unit coordinate directions: real then imaginary part of each mode.
      const Index mode = Index((j - 1) / 2) % grid.size();
      fn.direction = Coefficients::Zero(grid.size());
      fn.direction[mode] = (j - 1) % 2 == 0 ? std::complex<double>(std::sqrt(0.5), 0.0)
                                            : std::complex<double>(0.0, std::sqrt(0.5));
    }
    dict.push_back(std::move(fn));
  }
  const double r2 = double(m.params.N0) * m.params.N0;
  for (int j = 0; j < size - ramps; ++j) {
    DictionaryFunction fn;
    fn.ramp = false;
    // Offsets 0, +1/2, -1/2, +1, -1, ... gamma along the difference direction.
    const double step = 0.5 * double((j / 2 + 1) / 2) * ((j / 2) % 2 == 0 ? 1.0 : -1.0);
    fn.center = mid + (step * gamma) * diff;
    fn.mask = Eigen::ArrayXd::Ones(grid.size());
    if (j % 2 == 0) fn.mask = (grid.k2() <= r2).cast<double>();
    dict.push_back(std::move(fn));
  }
  return dict;
}

}  // namespace

std::vector<DgammaCell> dgamma_distance_bounds(const Model& m, const Field& x0, const Field& y0,
                                               std::span<const double> times,
                                               std::span<const double> gammas,
                                               const SimConfig& cfg, int dictionary_size) {
  require_paths(cfg);
  if (dictionary_size < 1) throw std::invalid_argument("dgamma_distance_bounds: empty dictionary");
  for (double g : gammas) {
    if (!(g > 0.0)) throw std::invalid_argument("dgamma_distance_bounds: gamma must be positive");
  }
  const long n = cfg.n_paths;
  const std::size_t nt = times.size(), ng = gammas.size(), nd = std::size_t(dictionary_size);

  std::vector<std::vector<DictionaryFunction>> dicts;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t g = 0; g < ng; ++g) {
      dicts.push_back(make_dictionary(m, x0, y0, times[i], gammas[g], dictionary_size));
    }
  }

  std::vector<double> upper(nt * ng * std::size_t(n));
  std::vector<double> lower(nt * ng * nd * std::size_t(n));
  run_synchronous_pairs(
      m, x0, y0, times, cfg, Stream::synchronous,
      [&](long path, std::size_t i, const Coefficients& a, const Coefficients& b) {
        for (std::size_t g = 0; g < ng; ++g) {
          const std::size_t cell = i * ng + g;
          upper[cell * std::size_t(n) + std::size_t(path)] = dgamma(a, b, gammas[g]);
          const auto& dict = dicts[cell];
          for (std::size_t j = 0; j < nd; ++j) {
            lower[(cell * nd + j) * std::size_t(n) + std::size_t(path)] =
                dict[j](a, gammas[g]) - dict[j](b, gammas[g]);
          }
        }
      });

  std::vector<DgammaCell> out;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t g = 0; g < ng; ++g) {
      const std::size_t cell = i * ng + g;
      DgammaCell c;
      c.t = times[i];
      c.gamma = gammas[g];
      c.upper = mean_estimate(row(upper, cell, n));
      double best = -1.0;
      for (std::size_t j = 0; j < nd; ++j) {
        const Estimate e = abs_estimate(mean_estimate(row(lower, cell * nd + j, n)));
        if (e.mean > best) {
          best = e.mean;
          c.lower = e;
          c.best_function = j;
        }
      }
      c.sandwich = c.lower.mean - kSigmas * c.lower.std_error <=
                   c.upper.mean + kSigmas * c.upper.std_error;
      out.push_back(c);
    }
  }
  return out;
}

InequalityReport entropy_inequality_check(std::span<const double> f_samples,
                                          std::span<const double> g_samples) {
  if (f_samples.size() != g_samples.size()) {
    throw std::invalid_argument("entropy_inequality_check: arrays differ in length");
  }
  if (f_samples.size() < 2) throw std::invalid_argument("entropy_inequality_check: need >= 2 samples");
  for (std::size_t i = 0; i < f_samples.size(); ++i) {
    if (!(f_samples[i] >= 0.0) || !std::isfinite(f_samples[i]) || !std::isfinite(g_samples[i])) {
      throw std::invalid_argument("entropy_inequality_check: f must be finite and >= 0, g finite");
    }
  }
  using ld = long double;
  const ld n = ld(f_samples.size());
  ld sf = 0, sfg = 0, sflogf = 0;
  ld peak = -std::numeric_limits<ld>::infinity();
  for (std::size_t i = 0; i < f_samples.size(); ++i) {
    const ld f = f_samples[i], g = g_samples[i];
    sf += f;
    sfg += f * g;
    if (f > 0) sflogf += f * std::log(f);
    peak = std::max(peak, g);
  }
  if (sf == 0) throw std::invalid_argument("entropy_inequality_check: f is identically zero");
  ld se = 0;
  for (double g : g_samples) se += std::exp(ld(g) - peak);
  const ld ef = sf / n;
  const ld log_eeg = peak + std::log(se / n);
  const ld lhs = sfg / n;
  const ld rhs = ef * log_eeg + sflogf / n - ef * std::log(ef);

  InequalityReport r;
  r.name = "entropy_inequality";
  r.lhs.mean = double(lhs);
  r.lhs.ci_lo = r.lhs.ci_hi = r.lhs.mean;
  r.lhs.n = static_cast<long>(f_samples.size());
  r.rhs = double(rhs);
  r.inputs = {{"n", double(n)}, {"mean_f", double(ef)}, {"log_mean_exp_g", double(log_eeg)}};
  r.finalize();
  r.pass = lhs <= rhs + 1e-12L * std::abs(rhs);
  return r;
}

}  // namespace sns
