#ifndef SNS_TESTS_SUPPORT_HPP
#define SNS_TESTS_SUPPORT_HPP

#include "sns/spectral.hpp"

#include <numbers>
#include <random>

namespace sns::testing {

inline Field random_field(const GridPtr& grid, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Field u(grid);
  for (Index i = 0; i < u.size(); ++i) u.amps()[i] = scale * std::complex<double>(g(rng), g(rng));
  return u;
}

inline RawCoefficients<double> random_raw(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RawCoefficients<double> w(2, grid->size());
  for (Index i = 0; i < w.cols(); ++i) {
    w(0, i) = {g(rng), g(rng)};
    w(1, i) = {g(rng), g(rng)};
  }
  return w;
}

// Velocity coefficient of u at any full-lattice wavevector, zero outside the truncation.
inline Eigen::Vector2cd velocity_at(const Field& u, const Wavevector& k) {
  const auto loc = u.grid().locate(k);
  if (!loc) return Eigen::Vector2cd::Zero();
  const Eigen::Vector2cd v = u.velocity(loc->half);
  return loc->negated ? Eigen::Vector2cd(v.conjugate()) : v;
}

// Brute-force pi_N P[(u . grad) v]: double loop over the square lattice with
// e_p e_q = e_{p+q} / (2 pi), no precomputed tables.
inline Field naive_bilinear(const Field& u, const Field& v) {
  const GridPtr& grid = u.grid_ptr();
  const int N = grid->N();
  RawCoefficients<double> w = RawCoefficients<double>::Zero(2, grid->size());
  for (Index i = 0; i < grid->size(); ++i) {
    const Wavevector k = grid->mode(i);
    for (int p1 = -N; p1 <= N; ++p1) {
      for (int p2 = -N; p2 <= N; ++p2) {
        const Wavevector p(p1, p2);
        const Wavevector q = k - p;
        const Eigen::Vector2cd up = velocity_at(u, p);
        const Eigen::Vector2cd vq = velocity_at(v, q);
        const std::complex<double> dot = up(0) * double(q.x()) + up(1) * double(q.y());
        w.col(i) += std::complex<double>(0, 1) * dot * vq / (2.0 * std::numbers::pi);
      }
    }
  }
  return leray_project(grid, w);
}

inline double rel_diff(const Field& a, const Field& b) {
  const double scale = std::max(norm(a), norm(b));
  return scale == 0.0 ? 0.0 : norm(a - b) / scale;
}

}  // namespace sns::testing

#endif  // SNS_TESTS_SUPPORT_HPP
