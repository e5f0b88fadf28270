#include "sns/spectral.hpp"

#include <algorithm>
#include <tuple>

namespace sns {

SpectralGrid::SpectralGrid(int N) : N_(N) {
  if (N < 1) throw std::invalid_argument("SpectralGrid: N must be positive");
  for (int k1 = 0; k1 <= N; ++k1) {
    for (int k2 = -N; k2 <= N; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      if (k1 * k1 + k2 * k2 > N * N) continue;
      modes_.emplace_back(k1, k2);
    }
  }
  std::sort(modes_.begin(), modes_.end(), [](const Wavevector& a, const Wavevector& b) {
    return std::make_tuple(a.squaredNorm(), a.x(), a.y()) <
           std::make_tuple(b.squaredNorm(), b.x(), b.y());
  });

  const Index n = size();
  k2_.resize(n);
  unit_perp_.resize(2, n);
  const int side = 2 * N + 1;
  lookup_.assign(static_cast<std::size_t>(side * side), 0);
  for (Index i = 0; i < n; ++i) {
    const Wavevector& k = modes_[static_cast<std::size_t>(i)];
    k2_[i] = double(k.squaredNorm());
    const double len = std::sqrt(k2_[i]);
    unit_perp_.col(i) = Eigen::Vector2d(-k.y() / len, k.x() / len);
    lookup_[static_cast<std::size_t>((k.x() + N) * side + (k.y() + N))] = int(i) + 1;
    lookup_[static_cast<std::size_t>((-k.x() + N) * side + (-k.y() + N))] = -(int(i) + 1);
  }
}

std::optional<SpectralGrid::Location> SpectralGrid::locate(const Wavevector& k) const {
  if (std::abs(k.x()) > N_ || std::abs(k.y()) > N_) return std::nullopt;
  const int side = 2 * N_ + 1;
  const int code = lookup_[static_cast<std::size_t>((k.x() + N_) * side + (k.y() + N_))];
  if (code == 0) return std::nullopt;
  if (code > 0) return Location{Index(code - 1), false};
  return Location{Index(-code - 1), true};
}

Index SpectralGrid::count_within(int radius) const {
  const double r2 = double(radius) * radius;
  return static_cast<Index>((k2_ <= r2).count());
}

void validate(const PhysicsParams& params, const SpectralGrid& grid) {
  if (!(params.nu > 0.0)) throw std::invalid_argument("PhysicsParams: nu must be positive");
  if (params.N0 < 1 || params.N0 > grid.N()) {
    throw std::invalid_argument("PhysicsParams: N0 must satisfy 1 <= N0 <= N");
  }
}

}  // namespace sns
