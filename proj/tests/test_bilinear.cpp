#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sns/bilinear.hpp"
#include "support.hpp"

using namespace sns;
using sns::testing::naive_bilinear;
using sns::testing::random_field;
using sns::testing::rel_diff;

TEST_CASE("B vanishes when either argument is zero") {
  const auto grid = SpectralGrid::make(4);
  const BilinearWorkspace<double> ws(grid);
  std::mt19937_64 rng(11);
  const Field u = random_field(grid, rng);
  CHECK(norm(bilinear_B(ws, Field::zero(grid), u)) == 0.0);
  CHECK(norm(bilinear_B(ws, u, Field::zero(grid))) == 0.0);
}

TEST_CASE("table-driven B matches the brute-force convolution") {
  SUBCASE("two-mode fields on N = 2") {
    const auto grid = SpectralGrid::make(2);
    const BilinearWorkspace<double> ws(grid);
    const Field u = Field::single_mode(grid, Wavevector(1, 0), {1.0, 0.5}) +
                    Field::single_mode(grid, Wavevector(0, 1), {-0.3, 0.2});
    const Field v = Field::single_mode(grid, Wavevector(1, 1), {0.7, -0.1}) +
                    Field::single_mode(grid, Wavevector(-1, 1), {0.2, 0.9});
    const Field naive = naive_bilinear(u, v);
    CHECK(norm(naive) > 0.0);
    CHECK(rel_diff(bilinear_B(ws, u, v), naive) < 1e-12);
  }
  SUBCASE("random pairs on N = 4") {
    const auto grid = SpectralGrid::make(4);
    const BilinearWorkspace<double> ws(grid);
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const Field u = random_field(grid, rng);
      const Field v = random_field(grid, rng);
      CHECK(rel_diff(bilinear_B(ws, u, v), naive_bilinear(u, v)) < 1e-12);
    }
  }
}

TEST_CASE("every in-truncation triad appears in the table") {
  const auto grid = SpectralGrid::make(3);
  const BilinearWorkspace<double> ws(grid);
  // Probe each pair of unit modes: B(e_p, e_q) must be nonzero exactly where
  // the naive convolution is.
  for (Index i = 0; i < grid->size(); ++i) {
    for (Index j = 0; j < grid->size(); ++j) {
      for (std::complex<double> phase : {std::complex<double>(1, 0), std::complex<double>(0, 1)}) {
        const Field u = Field::single_mode(grid, grid->mode(i), phase);
        const Field v = Field::single_mode(grid, grid->mode(j), 1.0);
        const Field fast = bilinear_B(ws, u, v);
        const Field slow = naive_bilinear(u, v);
        CHECK(norm(fast - slow) <= 1e-14 * std::max(1.0, norm(slow)));
      }
    }
  }
}

TEST_CASE("kernels agree with the general product") {
  const auto grid = SpectralGrid::make(6);
  const BilinearWorkspace<double> ws(grid);
  std::mt19937_64 rng(13);
  const Field x = random_field(grid, rng);
  const Field z = random_field(grid, rng, 0.1);

  Field::Coefficients sym;
  ws.apply_symmetric(x.amps(), sym);
  CHECK(rel_diff(Field(grid, sym), bilinear_B(ws, x, x)) < 1e-13);

  Field::Coefficients bxx, bz;
  ws.apply_coupled(x.amps(), z.amps(), bxx, bz);
  CHECK(bxx == sym);
  const Field expected = bilinear_B(ws, z, z) + bilinear_B_tilde(ws, z, x);
  CHECK(rel_diff(Field(grid, bz), expected) < 1e-13);
}

TEST_CASE("adjoint of the first slot") {
  const auto grid = SpectralGrid::make(5);
  const BilinearWorkspace<double> ws(grid);
  std::mt19937_64 rng(14);
  const Field x = random_field(grid, rng);
  const Field z = random_field(grid, rng);
  const Field g(grid, ws.adjoint_first(x.amps(), z.amps()));
  for (int trial = 0; trial < 20; ++trial) {
    const Field h = random_field(grid, rng);
    const double lhs = inner(g, h);
    const double rhs = inner(x, bilinear_B(ws, h, z));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("skew symmetry and energy neutrality") {
  const auto grid = SpectralGrid::make(8);
  const BilinearWorkspace<double> ws(grid);
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const Field x = random_field(grid, rng);
    const Field y = random_field(grid, rng);
    const Field z = random_field(grid, rng);
    const double scale = norm(x) * norm(bilinear_B(ws, y, z)) + norm(z) * norm(bilinear_B(ws, y, x));
    CHECK(std::abs(inner(x, bilinear_B(ws, y, x))) <= 1e-10 * norm(x) * norm(bilinear_B(ws, y, x)));
    CHECK(std::abs(inner(x, bilinear_B(ws, y, z)) + inner(z, bilinear_B(ws, y, x))) <= 1e-10 * scale);
    CHECK(std::abs(inner(x, bilinear_B(ws, x, x))) <= 1e-10 * norm(x) * norm(bilinear_B(ws, x, x)));
  }
}

TEST_CASE("symmetrized product") {
  const auto grid = SpectralGrid::make(5);
  const BilinearWorkspace<double> ws(grid);
  std::mt19937_64 rng(16);
  const Field u = random_field(grid, rng);
  const Field v = random_field(grid, rng);
  CHECK(rel_diff(bilinear_B_tilde(ws, u, u), 2.0 * bilinear_B(ws, u, u)) < 1e-15);
  CHECK(norm(bilinear_B_tilde(ws, u, v) - bilinear_B_tilde(ws, v, u)) == 0.0);
  const Field sum = bilinear_B(ws, u, v) + bilinear_B(ws, v, u);
  CHECK(rel_diff(bilinear_B_tilde(ws, u, v), sum) == 0.0);
}

TEST_CASE("low-mode projection of B") {
  const auto grid = SpectralGrid::make(8);
  const BilinearWorkspace<double> ws(grid);
  std::mt19937_64 rng(17);
  const int N0 = 2;
  const Field u = random_field(grid, rng);
  const Field v = random_field(grid, rng);
  CHECK(rel_diff(bilinear_B_low(ws, u, v, N0), split_low_high(N0, bilinear_B(ws, u, v)).low) == 0.0);

  // A single mode interacting with itself produces nothing.
  const Field e = Field::single_mode(grid, Wavevector(3, 3), {1.0, 0.0});
  CHECK(norm(bilinear_B_low(ws, e, e, N0)) == 0.0);
  // Parallel high modes only feed |k| > N0.
  const Field a = Field::single_mode(grid, Wavevector(3, 0), 1.0);
  const Field b = Field::single_mode(grid, Wavevector(4, 0), 1.0);
  CHECK(norm(bilinear_B_low(ws, a, b, N0)) == 0.0);
  CHECK_THROWS_AS(bilinear_B_low(ws, u, v, 0), std::invalid_argument);
}

TEST_CASE("grid mismatch is rejected") {
  const auto g4 = SpectralGrid::make(4);
  const auto g5 = SpectralGrid::make(5);
  const BilinearWorkspace<double> ws(g4);
  std::mt19937_64 rng(18);
  const Field u = random_field(g4, rng);
  const Field w = random_field(g5, rng);
  CHECK_THROWS_AS(bilinear_B(ws, u, w), std::invalid_argument);
  CHECK_THROWS_AS(bilinear_B(ws, w, w), std::invalid_argument);
}

TEST_CASE("long double instantiation agrees with double") {
  const auto grid = SpectralGrid::make(4);
  const BilinearWorkspace<double> wd(grid);
  const BilinearWorkspace<long double> wl(grid);
  std::mt19937_64 rng(19);
  const Field u = random_field(grid, rng);
  const Field v = random_field(grid, rng);
  const auto bl = bilinear_B(wl, u.cast<long double>(), v.cast<long double>()).cast<double>();
  CHECK(rel_diff(bl, bilinear_B(wd, u, v)) < 1e-14);
}
