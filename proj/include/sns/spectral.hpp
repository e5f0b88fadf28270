#ifndef SNS_SPECTRAL_HPP
#define SNS_SPECTRAL_HPP

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sns {

using Index = Eigen::Index;
using Wavevector = Eigen::Vector2i;

/// Index set of a Galerkin truncation on the 2-torus: the modes 0 < |k| <= N,
/// one representative per conjugate pair {k, -k}.
///
/// Representatives satisfy k1 > 0, or k1 == 0 and k2 > 0. They are ordered
/// by (|k|^2, k1, k2); every serialized field uses this order.
class SpectralGrid {
 public:
  /// Where a full-lattice wavevector lives in the half-lattice storage.
  struct Location {
    Index half;    // representative index
    bool negated;  // true if the wavevector is -representative
  };

  explicit SpectralGrid(int N);

  static std::shared_ptr<const SpectralGrid> make(int N) {
    return std::make_shared<const SpectralGrid>(N);
  }

  int N() const { return N_; }
  Index size() const { return static_cast<Index>(modes_.size()); }

  const std::vector<Wavevector>& half_lattice() const { return modes_; }
  const Wavevector& mode(Index i) const { return modes_[static_cast<std::size_t>(i)]; }

  /// |k|^2 per representative.
  const Eigen::ArrayXd& k2() const { return k2_; }

  /// Unit vectors k_perp / |k| (k_perp = (-k2, k1)), one column per representative.
  const Eigen::Matrix2Xd& unit_perp() const { return unit_perp_; }

  /// Locates k (or -k) in the half lattice; empty for k = 0 or |k| > N.
  std::optional<Location> locate(const Wavevector& k) const;

  /// Number of representatives with |k| <= radius.
  Index count_within(int radius) const;

  bool operator==(const SpectralGrid& other) const { return N_ == other.N_; }

 private:
  int N_;
  std::vector<Wavevector> modes_;
  Eigen::ArrayXd k2_;
  Eigen::Matrix2Xd unit_perp_;
  std::vector<int> lookup_;  // (2N+1)^2 table: 0 absent, +(i+1) representative, -(i+1) negated
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Viscosity and degeneracy radius of the forced equation.
struct PhysicsParams {
  double nu = 1.0;
  int N0 = 2;
};

/// Throws std::invalid_argument unless nu > 0 and 1 <= N0 <= grid.N().
void validate(const PhysicsParams& params, const SpectralGrid& grid);

/// A real, mean-zero, divergence-free vector field on the torus, truncated
/// to the modes of a SpectralGrid.
///
/// Storage is one complex stream amplitude a_k per representative mode. The
/// velocity coefficient is u_k = a_k * k_perp/|k| and u_{-k} = conj(u_k), so
/// k . u_k = 0 and reality hold by construction. With the orthonormal basis
/// e_k = exp(i k.x)/(2 pi) the L2 norm is |u|^2 = sum_{full lattice} |u_k|^2
/// = 2 sum_{half lattice} |a_k|^2.
///
/// The real-coefficient convention (x_k in R^2 with k . x_k = 0, one real
/// amplitude per cosine/sine mode) maps isometrically onto this storage:
/// the cosine and sine parts of mode k are sqrt(2) Re a_k and -sqrt(2) Im a_k
/// along k_perp/|k|.
template <typename Scalar>
class FourierField {
 public:
  using RealScalar = Scalar;
  using Complex = std::complex<Scalar>;
  using Coefficients = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
  using Velocity = Eigen::Matrix<Complex, 2, 1>;

  FourierField() = default;

  explicit FourierField(GridPtr grid)
      : grid_(std::move(grid)), amps_(Coefficients::Zero(grid_->size())) {}

  FourierField(GridPtr grid, Coefficients amps) : grid_(std::move(grid)), amps_(std::move(amps)) {
    if (amps_.size() != grid_->size()) {
      throw std::invalid_argument("FourierField: amplitude count does not match grid");
    }
  }

  static FourierField zero(GridPtr grid) { return FourierField(std::move(grid)); }

  /// Field carrying stream amplitude `a` on wavevector k. Passing -k of a
  /// representative stores the conjugate-consistent value -conj(a).
  static FourierField single_mode(GridPtr grid, const Wavevector& k, Complex a) {
    const auto loc = grid->locate(k);
    if (!loc) throw std::invalid_argument("single_mode: wavevector outside truncation");
    FourierField f(std::move(grid));
    f.amps_[loc->half] = loc->negated ? -std::conj(a) : a;
    return f;
  }

  const SpectralGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool empty() const { return !grid_; }

  const Coefficients& amps() const { return amps_; }
  Coefficients& amps() { return amps_; }

  Index size() const { return amps_.size(); }

  /// Velocity coefficient u_k of representative mode i.
  Velocity velocity(Index i) const {
    const Eigen::Vector2d e = grid_->unit_perp().col(i);
    return Velocity(amps_[i] * Scalar(e.x()), amps_[i] * Scalar(e.y()));
  }

  template <typename Other>
  FourierField<Other> cast() const {
    return FourierField<Other>(grid_, amps_.template cast<std::complex<Other>>());
  }

  FourierField& operator+=(const FourierField& o) {
    require_same(o);
    amps_ += o.amps_;
    return *this;
  }
  FourierField& operator-=(const FourierField& o) {
    require_same(o);
    amps_ -= o.amps_;
    return *this;
  }
  FourierField& operator*=(Scalar s) {
    amps_ *= s;
    return *this;
  }

  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(Scalar s, FourierField a) { return a *= s; }
  friend FourierField operator*(FourierField a, Scalar s) { return a *= s; }
  friend FourierField operator-(FourierField a) {
    a.amps_ = -a.amps_;
    return a;
  }

  void require_same(const FourierField& o) const {
    if (!grid_ || !o.grid_ || !(*grid_ == *o.grid_)) {
      throw std::invalid_argument("FourierField: grid mismatch");
    }
  }

 private:
  GridPtr grid_;
  Coefficients amps_;
};

using Field = FourierField<double>;

/// L2 inner product <u, v>.
template <typename Scalar>
Scalar inner(const FourierField<Scalar>& u, const FourierField<Scalar>& v) {
  u.require_same(v);
  return Scalar(2) * (u.amps().conjugate().cwiseProduct(v.amps())).real().sum();
}

template <typename Scalar>
Scalar norm_squared(const FourierField<Scalar>& u) {
  return Scalar(2) * u.amps().squaredNorm();
}

template <typename Scalar>
Scalar norm(const FourierField<Scalar>& u) {
  return std::sqrt(norm_squared(u));
}

/// log |u|, finite for fields whose squared norm underflows; -inf for u = 0.
template <typename Scalar>
Scalar log_norm(const FourierField<Scalar>& u) {
  const Scalar peak = u.amps().cwiseAbs().maxCoeff();
  if (peak == Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
  const Scalar scaled = Scalar(2) * (u.amps() / peak).squaredNorm();
  return std::log(peak) + Scalar(0.5) * std::log(scaled);
}

/// A^alpha u: amplitude a_k becomes |k|^{2 alpha} a_k.
template <typename Scalar>
FourierField<Scalar> stokes_apply(Scalar alpha, const FourierField<Scalar>& u) {
  const auto factor = u.grid().k2().pow(double(alpha)).template cast<Scalar>();
  FourierField<Scalar> out(u.grid_ptr());
  out.amps() = u.amps().array() * factor.template cast<std::complex<Scalar>>();
  return out;
}

/// |A^alpha u| = sqrt(sum |k|^{4 alpha} |u_k|^2).
template <typename Scalar>
Scalar sobolev_norm(Scalar alpha, const FourierField<Scalar>& u) {
  const auto weight = u.grid().k2().pow(2.0 * double(alpha)).template cast<Scalar>();
  return std::sqrt(Scalar(2) * (weight * u.amps().array().abs2()).sum());
}

/// Projection onto the modes |k| <= radius.
template <typename Scalar>
FourierField<Scalar> low_pass(int radius, const FourierField<Scalar>& u) {
  FourierField<Scalar> out = u;
  const double r2 = double(radius) * radius;
  const auto& k2 = u.grid().k2();
  for (Index i = 0; i < u.size(); ++i) {
    if (k2[i] > r2) out.amps()[i] = 0;
  }
  return out;
}

/// Projection onto the modes |k| > radius.
template <typename Scalar>
FourierField<Scalar> high_pass(int radius, const FourierField<Scalar>& u) {
  FourierField<Scalar> out = u;
  const double r2 = double(radius) * radius;
  const auto& k2 = u.grid().k2();
  for (Index i = 0; i < u.size(); ++i) {
    if (k2[i] <= r2) out.amps()[i] = 0;
  }
  return out;
}

template <typename Scalar>
struct LowHigh {
  FourierField<Scalar> low;
  FourierField<Scalar> high;
};

/// (pi_{N0} u, (Id - pi_{N0}) u).
template <typename Scalar>
LowHigh<Scalar> split_low_high(int N0, const FourierField<Scalar>& u) {
  if (N0 < 1 || N0 > u.grid().N()) {
    throw std::invalid_argument("split_low_high: N0 must satisfy 1 <= N0 <= N");
  }
  return {low_pass(N0, u), high_pass(N0, u)};
}

/// Raw (not necessarily divergence-free) vector coefficients w_k in C^2, one
/// column per representative mode; w_{-k} = conj(w_k) is implied.
template <typename Scalar>
using RawCoefficients = Eigen::Matrix<std::complex<Scalar>, 2, Eigen::Dynamic>;

template <typename Scalar>
RawCoefficients<Scalar> to_raw(const FourierField<Scalar>& u) {
  RawCoefficients<Scalar> w(2, u.size());
  for (Index i = 0; i < u.size(); ++i) w.col(i) = u.velocity(i);
  return w;
}

/// Leray projection: w_k -> w_k - (k . w_k) k / |k|^2, stored as stream amplitudes.
template <typename Scalar>
FourierField<Scalar> leray_project(const GridPtr& grid, const RawCoefficients<Scalar>& w) {
  if (w.cols() != grid->size()) {
    throw std::invalid_argument("leray_project: coefficient count does not match grid");
  }
  using Complex = std::complex<Scalar>;
  FourierField<Scalar> out(grid);
  for (Index i = 0; i < grid->size(); ++i) {
    const Wavevector& k = grid->mode(i);
    const Scalar kx = Scalar(k.x()), ky = Scalar(k.y());
    const Complex kdotw = kx * w(0, i) + ky * w(1, i);
    const Scalar kk = Scalar(grid->k2()[i]);
    const Complex px = w(0, i) - kdotw * kx / kk;
    const Complex py = w(1, i) - kdotw * ky / kk;
    const Eigen::Vector2d e = grid->unit_perp().col(i);
    out.amps()[i] = Scalar(e.x()) * px + Scalar(e.y()) * py;
  }
  return out;
}

}  // namespace sns

#endif  // SNS_SPECTRAL_HPP
