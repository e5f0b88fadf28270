#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sns/bounds.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace sns;
using sns::testing::random_field;

namespace {

// Field with amplitudes ~ |k|^{-s}, s drawn per field, so both smooth and
// rough triples are sampled.
Field power_law_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> slope(0.0, 3.0);
  const double s = slope(rng);
  Field u = random_field(grid, rng);
  for (Index i = 0; i < u.size(); ++i) u.amps()[i] *= std::pow(grid->k2()[i], -0.5 * s);
  return u;
}

BoundConstants sample_constants() {
  BoundConstants c;
  c.nu = 0.25;
  c.N0 = 2;
  c.C0 = 10.0;
  c.C1 = 0.39;
  c.C2 = 0.22;
  c.trQQ = 0.12;
  return c;
}

// K_p written out term by term, without logs.
double kp_oracle(int p, double z, const BoundConstants& c) {
  const double n0 = c.N0;
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  const double pre = std::pow(2.0, p - 1) *
                     std::exp(c.C1 * p * n0 * n0 * (z * z + z) + c.C1 * p * std::pow(n0, 3) / 2.0 + c.trQQ);
  const double a = std::pow(1.0 + c.C1 * std::pow(n0, 3) + c.nu * n0 * n0 / 4.0, p);
  const double b = fact * std::pow(c.C2 * c.C2 / (4.0 * c.nu) + c.C1 * std::pow(n0, 3) / 2.0, p) *
                   std::pow(c.C2 * c.C2 * p / (4.0 * c.nu), -p);
  return pre * (a + b);
}

}  // namespace

TEST_CASE("inverse fourth lattice sum and its tail") {
  // Direct sum over the square, no shell ordering.
  for (int R : {3, 10}) {
    double s = 0.0;
    for (int a = -R; a <= R; ++a) {
      for (int b = -R; b <= R; ++b) {
        const double n2 = double(a) * a + double(b) * b;
        if (n2 > 0 && n2 <= double(R) * R) s += 1.0 / (n2 * n2);
      }
    }
    CHECK(lattice_sum_inverse_fourth(R) == doctest::Approx(s).epsilon(1e-14));
  }
  for (int R : {5, 20, 50}) {
    CHECK(lattice_sum_inverse_fourth(R) + lattice_tail_bound(R) >= lattice_sum_inverse_fourth(4 * R));
  }
  // sum over Z^2 \ {0} of |k|^{-4} = 4 zeta(2) beta(2) = 6.0268...
  CHECK(lattice_sum_inverse_fourth(400) == doctest::Approx(6.0268120396).epsilon(1e-5));
}

TEST_CASE("C1 certifies the trilinear bound on random triples") {
  const GridPtr grid = SpectralGrid::make(8);
  const BilinearWorkspace<double> ws(grid);
  const double C1 = constant_C1(*grid);
  CHECK(C1 == doctest::Approx(constant_C1(*SpectralGrid::make(4))));
  CHECK(C1 == doctest::Approx(0.390729).epsilon(1e-5));

  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Field x = power_law_field(grid, rng);
    const Field y = power_law_field(grid, rng);
    const Field z = power_law_field(grid, rng);
    const double lhs = std::abs(inner(x, bilinear_B(ws, y, z)));
    const double rhs = norm(x) * norm(y) * sobolev_norm(1.5, z);
    worst = std::max(worst, lhs / rhs);
  }
  CHECK(worst <= C1);
}

TEST_CASE("C2 certifies the interpolated bound on random triples") {
  const GridPtr grid = SpectralGrid::make(8);
  const BilinearWorkspace<double> ws(grid);
  const double C2 = constant_C2(*grid);
  CHECK(C2 > 0.0);

  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    worst = std::max(worst, c2_ratio(ws, power_law_field(grid, rng), power_law_field(grid, rng),
                                     power_law_field(grid, rng)));
  }
  CHECK(worst <= C2);

  // A coarser grid embeds in a finer one, so its optimum cannot be larger.
  CHECK(constant_C2(*SpectralGrid::make(4)) <= C2);
  CHECK(constant_C2(*SpectralGrid::make(1)) == 0.0);

  const Field zero = Field::zero(grid);
  const Field u = random_field(grid, rng);
  CHECK(c2_ratio(ws, zero, u, u) == 0.0);
  CHECK(c2_ratio(ws, u, u, u) < 1e-13);  // <u, B(u, u)> = 0
}

TEST_CASE("C2 search returns a consistent maximizer") {
  const GridPtr grid = SpectralGrid::make(3);
  const BilinearWorkspace<double> ws(grid);
  C2Options opts;
  opts.restarts = 3;
  opts.iterations = 60;
  const C2Search s = maximize_c2_ratio(ws, opts);
  CHECK(s.ratio > 0.0);
  CHECK(c2_ratio(ws, s.x, s.y, s.z) == doctest::Approx(s.ratio).epsilon(1e-12));
  CHECK(constant_C2(*grid, opts) >= opts.safety * s.ratio * (1.0 - 1e-12));
}

TEST_CASE("constants of the default regime") {
  const GridPtr grid = SpectralGrid::make(8);
  const NoiseOperator noise = NoiseOperator::uniform(grid, 2, 0.1);
  const BoundConstants c = make_constants(*grid, PhysicsParams{0.25, 2}, noise);
  CHECK(c.C0 == doctest::Approx(10.0));
  // Six representatives with |k| <= 2, two real directions each.
  CHECK(c.trQQ == doctest::Approx(12 * 0.01));
  CHECK(c.delta_rate() == doctest::Approx(0.25 * 4 - 0.06));
  CHECK(hypothesis_report(c, {1, 2}).all_pass());
}

TEST_CASE("K_p matches direct arithmetic") {
  const BoundConstants c = sample_constants();
  BoundConstants stiff = c;
  stiff.nu = 0.3;
  CHECK(kp_constant(3, 0.1, stiff) == doctest::Approx(kp_oracle(3, 0.1, stiff)).epsilon(1e-12));
  for (int p : {1, 2}) {
    for (double z : {0.0, 0.01, 0.1, 0.5}) {
      CHECK(kp_constant(p, z, c) == doctest::Approx(kp_oracle(p, z, c)).epsilon(1e-12));
      CHECK(log_kp_constant(p, z, c) == doctest::Approx(std::log(kp_oracle(p, z, c))).epsilon(1e-12));
    }
    CHECK(kp_constant(p, 0.2, c) > kp_constant(p, 0.1, c));
  }
  // p = 3 needs nu > C2 sqrt(3/2).
  CHECK_THROWS_AS(kp_constant(3, 0.1, c), HypothesisError);
  CHECK_THROWS_AS(kp_constant(0, 0.1, c), std::invalid_argument);

  // Log form stays finite where the plain value overflows.
  BoundConstants big = c;
  big.C1 = 50.0;
  CHECK(std::isinf(kp_constant(2, 3.0, big)));
  CHECK(std::isfinite(log_kp_constant(2, 3.0, big)));
}

TEST_CASE("high-frequency envelopes") {
  const BoundConstants c = sample_constants();
  const double x = 0.3, z = 0.1;
  CHECK(zh_envelope_rate(1, c) == doctest::Approx(2 * 0.25 * 4 - 0.12));
  CHECK(log_zh_sup_envelope(2, x, z, c) ==
        doctest::Approx(std::log(kp_oracle(2, z, c) * std::exp(x * x) * std::pow(z, 4))).epsilon(1e-12));
  const double t = 1.7;
  const double direct = std::exp(-(2 * 0.25 * 2 * 4 - 0.12) * t) * kp_oracle(2, z, c) *
                        std::exp(2 * x * x + 2 * 0.25 * 2 * 4) * std::pow(z, 4);
  CHECK(log_zh_envelope(2, t, x, z, c) == doctest::Approx(std::log(direct)).epsilon(1e-12));
  CHECK(log_zh_envelope(1, 3.0, x, z, c) < log_zh_envelope(1, 2.0, x, z, c));
  CHECK(log_zh_envelope(1, 2.0, x, 0.0, c) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("control-energy constants") {
  const BoundConstants c = sample_constants();
  const double y = 0.2, z = 0.1;
  const double K2 = kp_oracle(2, z, c);
  const double C0 = c.C0, C1 = c.C1, n0 = c.N0, nu = c.nu, tr = c.trQQ;
  const double n06 = std::pow(n0, 6);
  const double L1 = 24 * C0 * C0 * C1 * C1 * n06 * (1 + K2 * std::exp(y * y));
  const double L2 = 3 * C0 * C0 *
                    (4 * std::pow(n0, 4) + 4 * std::sqrt(2.0) * C1 * C1 * n06 *
                                               std::sqrt(1 + K2 * std::exp(y * y)) * std::exp((y * y + tr) / 2));
  const double L3 = 2 * C0 * C0 * C1 * C1 * n06 * std::exp(2 * y * y + 4 * nu * n0 * n0) * K2 /
                    (4 * nu * n0 * n0 - tr);
  const double L4 = 4 * C0 * C0 * C1 * C1 * n06 * std::sqrt(2 * K2) * std::exp(1.5 * y * y + 2 * nu * n0 * n0) /
                    (2 * nu * n0 * n0 - tr);
  const LConstants L = l_constants(y, z, c);
  CHECK(L.K2 == doctest::Approx(K2).epsilon(1e-12));
  CHECK(L.L1 == doctest::Approx(L1).epsilon(1e-12));
  CHECK(L.L2 == doctest::Approx(L2).epsilon(1e-12));
  CHECK(L.L3 == doctest::Approx(L3).epsilon(1e-12));
  CHECK(L.L4 == doctest::Approx(L4).epsilon(1e-12));
  CHECK(control_energy_bound(y, z, c) ==
        doctest::Approx((L1 + L3) * std::pow(z, 4) + (L2 + L4) * z * z).epsilon(1e-12));

  const LConstants Ly = l_constants(0.4, z, c);
  CHECK(Ly.L1 > L.L1);
  CHECK(Ly.L2 > L.L2);
  CHECK(Ly.L3 > L.L3);
  CHECK(Ly.L4 > L.L4);

  // The denominators 2 nu N0^2 - trQQ vanish at the boundary.
  BoundConstants edge = c;
  edge.trQQ = 2 * edge.nu * edge.N0 * edge.N0;
  CHECK_THROWS_AS(l_constants(y, z, edge), HypothesisError);
}

TEST_CASE("log-Harnack right-hand side") {
  const BoundConstants c = sample_constants();
  const double logP = 0.37, y = 0.2, z = 0.1, dlogf = 0.8;
  CHECK(mlh_rhs(logP, 0.0, dlogf, 1.0, y, c) == logP);

  const MlhConstants m = mlh_constants(y, z, c);
  CHECK(m.K1 == doctest::Approx(kp_oracle(1, z, c)).epsilon(1e-12));
  CHECK(m.C == doctest::Approx(0.5 * std::max(m.L.L1 + m.L.L3, m.L.L2 + m.L.L4)));
  CHECK(m.C_tilde == doctest::Approx(std::exp(y * y + c.nu * 4) * std::sqrt(m.K1)).epsilon(1e-12));
  const double t = 2.0;
  const double expect = logP + 0.5 * (m.L.L1 + m.L.L3) * std::pow(z, 4) +
                        0.5 * (m.L.L2 + m.L.L4) * z * z +
                        std::exp(-c.delta_rate() * t) * m.C_tilde * z * dlogf;
  CHECK(mlh_rhs(logP, z, dlogf, t, y, c) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(mlh_rhs(logP, z, dlogf, 1e4, y, c) ==
        doctest::Approx(logP + 0.5 * (m.L.L1 + m.L.L3) * std::pow(z, 4) + 0.5 * (m.L.L2 + m.L.L4) * z * z)
            .epsilon(1e-12));
  CHECK(mlh_rhs(logP, z, dlogf, 3.0, y, c) < mlh_rhs(logP, z, dlogf, 1.0, y, c));
  CHECK(mlh_rhs(logP, 0.2, dlogf, 1.0, y, c) > mlh_rhs(logP, 0.1, dlogf, 1.0, y, c));
  CHECK(mlh_rhs(logP, z, dlogf, t, y, c, 1e-6) - logP ==
        doctest::Approx(1e-6 * (expect - logP)).epsilon(1e-9));
  CHECK_THROWS_AS(mlh_rhs(logP, z, dlogf, -1.0, y, c), std::invalid_argument);

  BoundConstants bad = c;
  bad.nu = 0.2;  // below C2
  CHECK_THROWS_AS(mlh_rhs(logP, z, dlogf, t, y, bad), HypothesisError);
}

TEST_CASE("hypothesis report") {
  BoundConstants c = sample_constants();
  const double need = std::max({2 * c.trQQ, c.C2 * std::sqrt(3.0 / 2.0), c.trQQ / 8});
  c.nu = 10 * need;
  const HypothesisReport ok = hypothesis_report(c, {1, 2, 3});
  CHECK(ok.all_pass());
  CHECK(ok.at("zh_decay_viscosity_p3").pass);
  CHECK_THROWS_AS(ok.at("missing"), std::out_of_range);

  c.nu = 0.0;
  const HypothesisReport none = hypothesis_report(c, {1});
  for (const Hypothesis& h : none.items) {
    if (h.name != "noise_invertible") CHECK_MESSAGE(!h.pass, h.name);
  }

  // Strict inequalities: equality fails.
  c.nu = 2 * c.trQQ;
  const HypothesisReport edge = hypothesis_report(c, {});
  CHECK_FALSE(edge.at("exp_moment_viscosity").pass);
  CHECK(edge.first_failure(exp_moment_hypotheses()) != nullptr);
  CHECK_THROWS_AS(require(edge, exp_moment_hypotheses()), HypothesisError);

  c = sample_constants();
  c.C0 = std::numeric_limits<double>::infinity();
  const HypothesisReport singular = hypothesis_report(c, {});
  CHECK_FALSE(singular.at("noise_invertible").pass);
  CHECK(singular.first_failure(exp_moment_hypotheses()) == nullptr);
  CHECK(singular.first_failure(mlh_hypotheses())->name == "noise_invertible");
}
