#include "sns/identities.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace sns {

namespace {

Field random_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> decade(-3.0, 3.0);
  const double scale = std::pow(10.0, decade(rng));
  Field u(grid);
  for (Index i = 0; i < u.size(); ++i) u.amps()[i] = scale * std::complex<double>(g(rng), g(rng));
  return u;
}

RawCoefficients<double> random_raw(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RawCoefficients<double> w(2, grid->size());
  for (Index i = 0; i < w.cols(); ++i) {
    w(0, i) = {g(rng), g(rng)};
    w(1, i) = {g(rng), g(rng)};
  }
  return w;
}

// Leray projection; the corrupted variant leaks 10% of the gradient part
// into the stream amplitude.
Field project(const GridPtr& grid, const RawCoefficients<double>& w, bool corrupt) {
  Field out = leray_project(grid, w);
  if (!corrupt) return out;
  for (Index i = 0; i < grid->size(); ++i) {
    const Eigen::Vector2d k = grid->mode(i).cast<double>() / std::sqrt(grid->k2()[i]);
    out.amps()[i] += 0.1 * (k.x() * w(0, i) + k.y() * w(1, i));
  }
  return out;
}

double ratio(double defect, double scale) {
  if (scale > 0.0) return defect / scale;
  return defect == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

void record(IdentityCheck& c, double defect) {
  ++c.evaluations;
  if (!(defect <= c.tolerance)) ++c.violations;
  if (!(defect <= c.worst)) c.worst = defect;
}

}  // namespace

long IdentityReport::violations() const {
  long n = 0;
  for (const auto& c : checks) n += c.violations;
  return n;
}

IdentityReport run_identity_suite(const BilinearWorkspace<double>& ws, int N0,
                                  const IdentityOptions& options) {
  const GridPtr& grid = ws.grid_ptr();
  if (N0 < 1 || N0 > grid->N()) throw std::invalid_argument("identity suite: bad N0");
  if (options.trials < 1) throw std::invalid_argument("identity suite: trials must be >= 1");

  IdentityReport report;
  report.N = grid->N();
  report.N0 = N0;
  report.trials = options.trials;
  report.seed = options.seed;
  report.corrupt_projection = options.corrupt_projection;

  const double skew = options.skew_tolerance;
  const double mode = options.mode_tolerance;
  IdentityCheck orth{"orthogonality <x,B(y,x)> = 0", skew};
  IdentityCheck anti{"antisymmetry <x,B(y,z)> = -<z,B(y,x)>", skew};
  IdentityCheck idem{"leray idempotence per mode", mode};
  IdentityCheck comp{"leray complement parallel to k per mode", mode};
  IdentityCheck split{"low + high reassembles u per mode", 0.0};
  IdentityCheck support{"low/high supports per mode", 0.0};
  IdentityCheck hl{"per-mode |A^a u^l| <= N0^2a |u^l|, |A^a u^h| >= N0^2a |u^h|", 0.0};
  IdentityCheck hl_norm{"frequency inequalities on norms", mode};

  const double alphas[] = {0.25, 0.5, 1.0, 1.5};
  const double r2 = double(N0) * N0;
  std::mt19937_64 rng(options.seed);

  for (long trial = 0; trial < options.trials; ++trial) {
    const Field x = random_field(grid, rng);
    const Field y = random_field(grid, rng);
    const Field z = random_field(grid, rng);

    const Field byx = bilinear_B(ws, y, x);
    const Field byz = bilinear_B(ws, y, z);
    const double nbyx = norm(byx);
    record(orth, ratio(std::abs(inner(x, byx)), norm(x) * nbyx));
    record(anti, ratio(std::abs(inner(x, byz) + inner(z, byx)),
                       std::max(norm(x) * norm(byz), norm(z) * nbyx)));

    const RawCoefficients<double> w = random_raw(grid, rng);
    const Field pw = project(grid, w, options.corrupt_projection);
    const RawCoefficients<double> pw_raw = to_raw(pw);
    const Field ppw = project(grid, pw_raw, options.corrupt_projection);
    for (Index i = 0; i < grid->size(); ++i) {
      const double wk = w.col(i).norm();
      record(idem, ratio(std::abs(ppw.amps()[i] - pw.amps()[i]), wk));
      // w - Pw must be a gradient: no component along k_perp.
      const Eigen::Vector2d e = grid->unit_perp().col(i);
      const Eigen::Vector2cd r = w.col(i) - pw_raw.col(i);
      record(comp, ratio(std::abs(e.x() * r(0) + e.y() * r(1)), wk));
    }

    const LowHigh<double> lh = split_low_high(N0, x);
    for (Index i = 0; i < grid->size(); ++i) {
      const bool low = grid->k2()[i] <= r2;
      const std::complex<double> sum = lh.low.amps()[i] + lh.high.amps()[i];
      record(split, sum == x.amps()[i] ? 0.0 : 1.0);
      const bool ok = low ? (lh.high.amps()[i] == 0.0 && lh.low.amps()[i] == x.amps()[i])
                          : (lh.low.amps()[i] == 0.0 && lh.high.amps()[i] == x.amps()[i]);
      record(support, ok ? 0.0 : 1.0);
      for (double a : alphas) {
        const double weight = std::pow(grid->k2()[i], a);
        const double bound = std::pow(r2, a);
        record(hl, (low ? weight <= bound : weight >= bound) ? 0.0 : 1.0);
      }
    }
    const double nl = norm(lh.low), nh = norm(lh.high);
    for (double a : alphas) {
      const double f = std::pow(r2, a);
      record(hl_norm, ratio(std::max(0.0, sobolev_norm(a, lh.low) - f * nl), f * nl));
      record(hl_norm, ratio(std::max(0.0, f * nh - sobolev_norm(a, lh.high)), f * nh));
    }
  }

  report.checks = {orth, anti, idem, comp, split, support, hl, hl_norm};
  return report;
}

}  // namespace sns
