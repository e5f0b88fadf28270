#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sns/coupling.hpp"
#include "support.hpp"

#include <sstream>

using namespace sns;
using sns::testing::random_field;
using sns::testing::rel_diff;

namespace {

struct Setup {
  GridPtr grid = SpectralGrid::make(8);
  BilinearWorkspace<double> ws{grid};
  PhysicsParams params{0.5, 2};
  NoiseOperator noise = NoiseOperator::uniform(grid, 2, 0.1);
  Field x0 = Field::single_mode(grid, Wavevector(1, 0), {0.6, 0.0}) +
             Field::single_mode(grid, Wavevector(1, 1), {0.0, -0.3});
  Field z = Field::single_mode(grid, Wavevector(1, 0), {0.05, 0.0}) +
            Field::single_mode(grid, Wavevector(2, 1), {0.03, 0.02});
};

}  // namespace

TEST_CASE("low-frequency schedule") {
  Setup s;
  const Field zl = low_pass(2, s.z);
  CHECK(rel_diff(zl_schedule(0.0, s.z, 2), zl) == 0.0);
  CHECK(norm(zl_schedule(1.0, s.z, 2)) == 0.0);
  CHECK(norm(zl_schedule(100 * 0.01, s.z, 2)) == 0.0);
  CHECK(norm(zl_schedule(2.5, s.z, 2)) == 0.0);
  CHECK(rel_diff(zl_schedule(0.5, s.z, 2), 0.5 * zl) < 1e-16);
  CHECK_THROWS_AS(zl_schedule(-0.1, s.z, 2), std::invalid_argument);
}

TEST_CASE("high-frequency residual step") {
  Setup s;
  std::mt19937_64 rng(31);
  const Field X = random_field(s.grid, rng);
  const Field zero = Field::zero(s.grid);
  CHECK(norm(step_zh(s.ws, zero, zero, X, 1e-2, s.params)) == 0.0);

  const Field zh = high_pass(2, random_field(s.grid, rng, 0.1));
  const Field zl = low_pass(2, random_field(s.grid, rng, 0.1));
  const Field out = step_zh(s.ws, zh, zl, X, 1e-2, s.params);
  CHECK(norm(low_pass(2, out)) == 0.0);
  CHECK(norm(out) > 0.0);

  // Against an explicit per-mode evaluation of the same step.
  const Field Z = zl + zh;
  const Field drive = bilinear_B(s.ws, Z, Z) + bilinear_B_tilde(s.ws, Z, X);
  Field expect(s.grid);
  for (Index i = 0; i < expect.size(); ++i) {
    if (s.grid->k2()[i] <= 4) continue;
    expect.amps()[i] =
        std::exp(-s.params.nu * s.grid->k2()[i] * 1e-2) * (zh.amps()[i] - 1e-2 * drive.amps()[i]);
  }
  CHECK(rel_diff(out, expect) < 1e-13);

  SUBCASE("single high mode converges to the fine-step solution") {
    const Field e = Field::single_mode(s.grid, Wavevector(3, 1), {0.4, 0.1});
    const auto run = [&](double dt) {
      Field h = e;
      const int M = step_count(1.0, dt);
      for (int n = 0; n < M; ++n) h = step_zh(s.ws, h, zero, zero, dt, s.params);
      return h;
    };
    const Field ref = run(1e-5);
    // A lone mode does not interact with itself, so the decay is exactly linear.
    // 1e5 steps of rounding separate the two.
    CHECK(rel_diff(ref, std::exp(-s.params.nu * 10.0) * e) < 1e-10);
    CHECK(rel_diff(run(1e-2), ref) < 1e-10);
  }
}

TEST_CASE("control") {
  Setup s;
  std::mt19937_64 rng(32);
  const Field X = random_field(s.grid, rng);
  const Field zero = Field::zero(s.grid);

  CHECK(norm(control_v(s.ws, 0.3, zero, zero, X, zero, s.params, s.noise)) == 0.0);
  const Field zh = high_pass(2, random_field(s.grid, rng, 0.1));
  CHECK(norm(control_v(s.ws, 1.5, zero, zero, X, s.z, s.params, s.noise)) == 0.0);

  for (double t : {0.0, 0.37, 0.99, 1.0, 2.0}) {
    const Field zl = zl_schedule(t, s.z, 2);
    const Field v = control_v(s.ws, t, zl, zh, X, s.z, s.params, s.noise);
    const Field vy = control_v_y_form(s.ws, t, zl, zh, X + zl + zh, s.z, s.params, s.noise);
    CHECK(norm(high_pass(2, v)) == 0.0);
    CHECK(rel_diff(v, vy) < 1e-10);
  }

  SUBCASE("viscosity flag only changes the Stokes term") {
    const double t = 0.25;
    const Field zl = zl_schedule(t, s.z, 2);
    const Field with = control_v(s.ws, t, zl, zh, X, s.z, s.params, s.noise, {true});
    const Field without = control_v(s.ws, t, zl, zh, X, s.z, s.params, s.noise, {false});
    const Field expect = s.noise.apply_inverse(((1 - t) * (s.params.nu - 1.0)) *
                                               stokes_apply(1.0, low_pass(2, s.z)));
    CHECK(rel_diff(with - without, expect) < 1e-12);
  }
}

TEST_CASE("coupled run") {
  Setup s;
  const double T = 2.0, dt = 1e-2;

  SUBCASE("identical starts need no control") {
    const auto traj = run_coupled(s.ws, s.x0, s.x0, T, dt, s.params, s.noise, 4);
    for (std::size_t i = 0; i < traj.log_m.size(); ++i) {
      CHECK(traj.log_m[i] == 0.0);
      CHECK(traj.v_energy[i] == 0.0);
      CHECK(traj.y(i).amps() == traj.x_path.states[i].amps());
    }
  }
  SUBCASE("driving path is the plain simulation") {
    const auto traj = run_coupled(s.ws, s.x0, s.x0 + s.z, T, dt, s.params, s.noise, 4);
    const SdePath plain = simulate_x(s.ws, s.x0, T, dt, s.params, s.noise, 4);
    for (std::size_t i = 0; i < plain.states.size(); ++i) {
      CHECK(traj.x_path.states[i].amps() == plain.states[i].amps());
      CHECK(traj.x_path.dissipation[i] == doctest::Approx(plain.dissipation[i]).epsilon(1e-14));
    }
  }
  SUBCASE("low modes close at t = 1 and stay closed") {
    const auto traj = run_coupled(s.ws, s.x0, s.x0 + s.z, T, dt, s.params, s.noise, 5);
    const std::size_t one = traj.x_path.node(1.0);
    CHECK(norm(traj.zl[one]) == 0.0);
    CHECK(norm(traj.zl[one - 1]) > 0.0);
    for (std::size_t i = 0; i < traj.zh.size(); ++i) {
      CHECK(norm(low_pass(2, traj.zh[i])) == 0.0);
      CHECK(norm(high_pass(2, traj.v[i])) == 0.0);
      if (i >= one) {
        CHECK(low_pass(2, traj.y(i)).amps() == low_pass(2, traj.x_path.states[i]).amps());
      }
    }
    for (std::size_t i = 1; i < traj.v_energy.size(); ++i) {
      CHECK(traj.v_energy[i] >= traj.v_energy[i - 1]);
    }
    const Field z = (s.x0 + s.z) - s.x0;
    CHECK(rel_diff(traj.zh[0], high_pass(2, z)) == 0.0);
    CHECK(rel_diff(traj.zl[0], low_pass(2, z)) == 0.0);
  }
  SUBCASE("controls match the closed forms along the path") {
    const auto traj = run_coupled(s.ws, s.x0, s.x0 + s.z, 1.5, dt, s.params, s.noise, 6);
    for (std::size_t i = 0; i < traj.v.size(); ++i) {
      const double t = traj.x_path.times[i];
      const Field& X = traj.x_path.states[i];
      const Field v = control_v(s.ws, t, traj.zl[i], traj.zh[i], X, s.z, s.params, s.noise);
      const Field vy =
          control_v_y_form(s.ws, t, traj.zl[i], traj.zh[i], traj.y(i), s.z, s.params, s.noise);
      CHECK(rel_diff(traj.v[i], v) < 1e-12);
      CHECK(rel_diff(v, vy) < 1e-10);
    }
  }
  SUBCASE("log density uses the left-point rule") {
    const auto traj = run_coupled(s.ws, s.x0, s.x0 + s.z, 0.5, dt, s.params, s.noise, 7);
    double log_m = 0.0, energy = 0.0;
    for (std::size_t n = 0; n + 1 < traj.log_m.size(); ++n) {
      const Field& v = traj.v[n];
      const Field w = s.noise.apply_inverse(traj.x_path.increments[n]);
      log_m -= inner(v, w) + 0.5 * norm_squared(v) * dt;
      energy += norm_squared(v) * dt;
    }
    CHECK(traj.log_m.back() == doctest::Approx(log_m).epsilon(1e-12));
    CHECK(traj.v_energy.back() == doctest::Approx(energy).epsilon(1e-12));
  }
  SUBCASE("Girsanov density has unit mean") {
    const int n = 2000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const auto traj = run_coupled(s.ws, s.x0, s.x0 + s.z, 1.0, 2e-2, s.params, s.noise, 100 + i);
      const double m = std::exp(traj.log_m.back());
      s1 += m;
      s2 += m * m;
    }
    const double mean = s1 / n;
    const double se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - 1.0) <= 3 * se);
  }
  SUBCASE("trajectory CSV") {
    const auto traj = run_coupled(s.ws, s.x0, s.x0 + s.z, 0.1, dt, s.params, s.noise, 8);
    std::stringstream ss;
    write_trajectory_csv(ss, traj);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "t,zl_norm,zh_norm2,v_norm2,log_m,v_energy");
    int rows = 0;
    while (std::getline(ss, line)) ++rows;
    CHECK(rows == 11);
  }
  SUBCASE("degenerate noise is rejected") {
    CHECK_THROWS_AS(run_coupled(s.ws, s.x0, s.x0 + s.z, T, dt, s.params,
                                NoiseOperator::zero(s.grid, 2), 1),
                    std::domain_error);
  }
}
