#ifndef SNS_BILINEAR_HPP
#define SNS_BILINEAR_HPP

#include "sns/spectral.hpp"

#include <algorithm>
#include <numbers>

namespace sns {

/// Precomputed interaction table for the Galerkin-truncated nonlinearity
/// B(u, v) = pi_N P[(u . grad) v].
///
/// Full-lattice slot j < n is representative k_j, slot n + j is -k_j. With
/// u_p = a~_p e_p (e_p = p_perp/|p|), the output stream amplitude is
///
///   b_k = i sum_{p+q=k} w(k,p,q) a~_p c~_q,  w = (e_p . q)(e_q . e_k) / (2 pi),
///
/// the (2 pi)^{-1} coming from e_p e_q = e_{p+q} / (2 pi). Contracting with
/// e_k is exactly the Leray projection in two dimensions.
template <typename Scalar>
class BilinearWorkspace {
 public:
  using Complex = std::complex<Scalar>;
  using Coefficients = typename FourierField<Scalar>::Coefficients;

  explicit BilinearWorkspace(GridPtr grid) : grid_(std::move(grid)) {
    const Index n = grid_->size();
    const auto full_vec = [&](Index j) -> Wavevector {
      return j < n ? grid_->mode(j) : Wavevector(-grid_->mode(j - n));
    };
    const auto full_unit = [&](Index j) -> Eigen::Vector2d {
      return j < n ? Eigen::Vector2d(grid_->unit_perp().col(j))
                   : Eigen::Vector2d(-grid_->unit_perp().col(j - n));
    };
    offsets_.reserve(static_cast<std::size_t>(n) + 1);
    offsets_.push_back(0);
    for (Index out = 0; out < n; ++out) {
      const Wavevector k = grid_->mode(out);
      const Eigen::Vector2d ek = grid_->unit_perp().col(out);
      for (Index jp = 0; jp < 2 * n; ++jp) {
        const Wavevector p = full_vec(jp);
        const Wavevector q = k - p;
        const auto loc = grid_->locate(q);
        if (!loc) continue;
        const Index jq = loc->negated ? loc->half + n : loc->half;
        const double weight = full_unit(jp).dot(q.cast<double>()) * full_unit(jq).dot(ek) /
                              (2.0 * std::numbers::pi);
        if (weight == 0.0) continue;
        p_.push_back(static_cast<int>(jp));
        q_.push_back(static_cast<int>(jq));
        w_.push_back(Scalar(weight));
      }
      offsets_.push_back(static_cast<int>(w_.size()));
    }
    build_symmetric();
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const SpectralGrid& grid() const { return *grid_; }
  std::size_t triad_count() const { return w_.size(); }

  /// Stream amplitudes of B(u, v).
  void apply(const Coefficients& u, const Coefficients& v, Coefficients& out) const {
    thread_local Coefficients fu, fv;
    expand(u, fu);
    expand(v, fv);
    const Index n = grid_->size();
    out.resize(n);
    for (Index k = 0; k < n; ++k) {
      Scalar re = 0, im = 0;
      for (int t = offsets_[k]; t < offsets_[k + 1]; ++t) {
        const Complex a = fu[p_[t]], b = fv[q_[t]];
        re += w_[t] * (a.real() * b.real() - a.imag() * b.imag());
        im += w_[t] * (a.real() * b.imag() + a.imag() * b.real());
      }
      out[k] = Complex(-im, re);
    }
  }

  /// Stream amplitudes of B(u, u). Accumulates in the same order as the
  /// B(x, x) output of apply_coupled, so both give bitwise equal results.
  void apply_symmetric(const Coefficients& u, Coefficients& out) const {
    thread_local Coefficients fu;
    expand(u, fu);
    const Index n = grid_->size();
    out.resize(n);
    for (Index k = 0; k < n; ++k) {
      Scalar re = 0, im = 0;
      for (int t = sym_offsets_[k]; t < sym_offsets_[k + 1]; ++t) {
        const Pair& s = sym_[t];
        const Complex a = fu[s.p], b = fu[s.q];
        re += s.w * (a.real() * b.real() - a.imag() * b.imag());
        im += s.w * (a.real() * b.imag() + a.imag() * b.real());
      }
      out[k] = Complex(-im, re);
    }
  }

  /// One pass producing B(x, x) and B(z, z) + B(z, x) + B(x, z), which is
  /// B(x + z, x + z) - B(x, x) evaluated without cancellation.
  void apply_coupled(const Coefficients& x, const Coefficients& z, Coefficients& bxx,
                     Coefficients& bz) const {
    thread_local Coefficients fx, fz;
    expand(x, fx);
    expand(z, fz);
    const Index n = grid_->size();
    bxx.resize(n);
    bz.resize(n);
    for (Index k = 0; k < n; ++k) {
      Scalar are = 0, aim = 0, bre = 0, bim = 0;
      for (int t = sym_offsets_[k]; t < sym_offsets_[k + 1]; ++t) {
        const Pair& s = sym_[t];
        const Complex xp = fx[s.p], xq = fx[s.q], zp = fz[s.p], zq = fz[s.q];
        // (x+z)_p (x+z)_q - x_p x_q = z_p (x+z)_q + x_p z_q
        const Scalar yr = xq.real() + zq.real(), yi = xq.imag() + zq.imag();
        are += s.w * (xp.real() * xq.real() - xp.imag() * xq.imag());
        aim += s.w * (xp.real() * xq.imag() + xp.imag() * xq.real());
        bre += s.w * (zp.real() * yr - zp.imag() * yi + xp.real() * zq.real() -
                      xp.imag() * zq.imag());
        bim += s.w * (zp.real() * yi + zp.imag() * yr + xp.real() * zq.imag() +
                      xp.imag() * zq.real());
      }
      bxx[k] = Complex(-aim, are);
      bz[k] = Complex(-bim, bre);
    }
  }

  /// The field G with <G, h> = <x, B(h, z)> for every h on the grid.
  Coefficients adjoint_first(const Coefficients& x, const Coefficients& z) const {
    thread_local Coefficients fz;
    expand(z, fz);
    const Index n = grid_->size();
    Coefficients g = Coefficients::Zero(n);
    for (Index k = 0; k < n; ++k) {
      // <x, i w h~_p z~_q>: alpha = conj(x_k) i w z~_q multiplies h~_p.
      const Complex xc = std::conj(x[k]) * Complex(0, 1);
      for (int t = offsets_[k]; t < offsets_[k + 1]; ++t) {
        const Complex alpha = xc * w_[t] * fz[q_[t]];
        const int jp = p_[t];
        if (jp < n) {
          g[jp] += std::conj(alpha);
        } else {
          g[jp - n] -= alpha;
        }
      }
    }
    return g;
  }

 private:
  struct Pair {
    int p;
    int q;
    Scalar w;
  };

  // Merges (p, q) and (q, p) of the ordered table into one unordered entry.
  void build_symmetric() {
    const Index n = grid_->size();
    sym_offsets_.assign(1, 0);
    for (Index k = 0; k < n; ++k) {
      std::vector<Pair> merged;
      for (int t = offsets_[k]; t < offsets_[k + 1]; ++t) {
        const int a = std::min(p_[t], q_[t]), b = std::max(p_[t], q_[t]);
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const Pair& e) { return e.p == a && e.q == b; });
        if (it == merged.end()) {
          merged.push_back({a, b, w_[t]});
        } else {
          it->w += w_[t];
        }
      }
      for (const Pair& e : merged) {
        if (e.w != Scalar(0)) sym_.push_back(e);
      }
      sym_offsets_.push_back(static_cast<int>(sym_.size()));
    }
  }

  void expand(const Coefficients& a, Coefficients& full) const {
    const Index n = grid_->size();
    full.resize(2 * n);
    full.head(n) = a;
    full.tail(n) = -a.conjugate();
  }

  GridPtr grid_;
  std::vector<int> offsets_;
  std::vector<int> p_;
  std::vector<int> q_;
  std::vector<Scalar> w_;
  std::vector<int> sym_offsets_;
  std::vector<Pair> sym_;
};

template <typename Scalar>
void require_workspace(const BilinearWorkspace<Scalar>& ws, const FourierField<Scalar>& u) {
  if (!(ws.grid() == u.grid())) throw std::invalid_argument("bilinear: grid mismatch");
}

/// B(u, v) = pi_N P[(u . grad) v].
template <typename Scalar>
FourierField<Scalar> bilinear_B(const BilinearWorkspace<Scalar>& ws, const FourierField<Scalar>& u,
                                const FourierField<Scalar>& v) {
  u.require_same(v);
  require_workspace(ws, u);
  FourierField<Scalar> out(u.grid_ptr());
  ws.apply(u.amps(), v.amps(), out.amps());
  return out;
}

/// B(u, v) + B(v, u).
template <typename Scalar>
FourierField<Scalar> bilinear_B_tilde(const BilinearWorkspace<Scalar>& ws,
                                      const FourierField<Scalar>& u,
                                      const FourierField<Scalar>& v) {
  return bilinear_B(ws, u, v) + bilinear_B(ws, v, u);
}

/// pi_{N0} B(u, v).
template <typename Scalar>
FourierField<Scalar> bilinear_B_low(const BilinearWorkspace<Scalar>& ws,
                                    const FourierField<Scalar>& u, const FourierField<Scalar>& v,
                                    int N0) {
  if (N0 < 1 || N0 > u.grid().N()) throw std::invalid_argument("bilinear_B_low: bad N0");
  return low_pass(N0, bilinear_B(ws, u, v));
}

}  // namespace sns

#endif  // SNS_BILINEAR_HPP
