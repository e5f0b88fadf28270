#ifndef SNS_BOUNDS_HPP
#define SNS_BOUNDS_HPP

#include "sns/bilinear.hpp"
#include "sns/dynamics.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace sns {

/// One named strict inequality lhs > rhs between two computed numbers.
struct Hypothesis {
  std::string name;
  std::string condition;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct HypothesisReport {
  std::vector<Hypothesis> items;

  bool all_pass() const;
  /// Throws std::out_of_range for unknown names.
  const Hypothesis& at(const std::string& name) const;
  /// First failing item among `names`, or nullptr.
  const Hypothesis* first_failure(const std::vector<std::string>& names) const;
};

/// A required hypothesis does not hold.
class HypothesisError : public std::runtime_error {
 public:
  explicit HypothesisError(const Hypothesis& h);
  const Hypothesis& hypothesis() const { return h_; }

 private:
  Hypothesis h_;
};

/// sum |k|^{-4} over 0 < |k| <= R on the full lattice.
double lattice_sum_inverse_fourth(int R);

/// Upper bound for sum |k|^{-4} over |k| > R.
inline double lattice_tail_bound(int R) { return 2.0 * 3.14159265358979323846 / (double(R) * R); }

/// C1 with |<x, B(y, z)>| <= C1 |x| |y| |A^{3/2} z|. Derived from
/// ||grad z||_inf <= (2 pi)^{-1} sum |k| |z_k| and Cauchy-Schwarz, with the
/// lattice sum taken to radius max(R, N) plus the analytic tail.
double constant_C1(const SpectralGrid& grid, int R = 100);

/// |<x, B(y, z)>| / (|x|^{1/2}|A^{1/2}x|^{1/2} |y|^{1/2}|A^{1/2}y|^{1/2} |A^{1/2}z|).
double c2_ratio(const BilinearWorkspace<double>& ws, const Field& x, const Field& y, const Field& z);

struct C2Options {
  int restarts = 12;
  int iterations = 250;
  double safety = 1.5;
  std::uint64_t seed = 0x5eed;
};

/// Largest ratio found by gradient ascent from random starts on each grid
/// 1..N in turn (each grid also restarts from the previous optimum), times
/// the safety factor. Results for default options are cached per N.
double constant_C2(const SpectralGrid& grid, const C2Options& options = {});

/// Unscaled maximizer search on one grid; returns the best ratio and its triple.
struct C2Search {
  double ratio = 0.0;
  Field x, y, z;
};
C2Search maximize_c2_ratio(const BilinearWorkspace<double>& ws, const C2Options& options,
                           const C2Search* warm_start = nullptr);

/// Constants shared by every bound.
struct BoundConstants {
  double nu = 0.0;
  int N0 = 0;
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double trQQ = 0.0;

  /// nu N0^2 - trQQ / 2, the exponent of delta(t).
  double delta_rate() const { return nu * N0 * N0 - 0.5 * trQQ; }
};

BoundConstants make_constants(const SpectralGrid& grid, const PhysicsParams& params,
                              const NoiseOperator& noise, const C2Options& c2 = {});

/// Every hypothesis of the moment lemmas and the log-Harnack theorem,
/// evaluated separately.
HypothesisReport hypothesis_report(const BoundConstants& c, const std::vector<int>& p_list);

/// Hypothesis names required by each result.
std::vector<std::string> exp_moment_hypotheses();
std::vector<std::string> zh_moment_hypotheses(int p);
std::vector<std::string> mlh_hypotheses();

/// Throws HypothesisError for the first failing name.
void require(const HypothesisReport& report, const std::vector<std::string>& names);

/// K_p of the high-frequency moment bounds. Throws unless
/// nu > max(C2 sqrt(p/2), 2 trQQ).
double kp_constant(int p, double z_norm, const BoundConstants& c);

/// log K_p; finite where K_p itself would overflow.
double log_kp_constant(int p, double z_norm, const BoundConstants& c);

/// log of E_P sup_{[0,1]} |Z^h|^{2p} <= K_p e^{|x|^2} |z|^{2p}.
double log_zh_sup_envelope(int p, double x_norm, double z_norm, const BoundConstants& c);

/// log of E_P |Z^h(t)|^{2p} <= exp(-(2 nu p N0^2 - trQQ) t) K_p e^{2|x|^2 + 2 nu p N0^2} |z|^{2p}.
double log_zh_envelope(int p, double t, double x_norm, double z_norm, const BoundConstants& c);

/// 2 nu p N0^2 - trQQ.
double zh_envelope_rate(int p, const BoundConstants& c);

struct LConstants {
  double L1 = 0.0, L2 = 0.0, L3 = 0.0, L4 = 0.0;
  double K2 = 0.0;
};

/// Control-energy constants; K2 is evaluated at z_norm. Requires
/// 4 nu N0^2 > trQQ and 2 nu N0^2 > trQQ.
LConstants l_constants(double y_norm, double z_norm, const BoundConstants& c);

/// Bound on E int_0^t |v|^2: (L1 + L3)|z|^4 + (L2 + L4)|z|^2.
double control_energy_bound(double y_norm, double z_norm, const BoundConstants& c);

/// The assembled constants of the log-Harnack inequality:
///   C = max(L1 + L3, L2 + L4) / 2 bounds the |z|^2 + |z|^4 part,
///   C~ = exp(|y|^2 + nu N0^2) sqrt(K1).
struct MlhConstants {
  LConstants L;
  double K1 = 0.0;
  double C = 0.0;
  double C_tilde = 0.0;
  double delta_rate = 0.0;
};

MlhConstants mlh_constants(double y_norm, double z_norm, const BoundConstants& c);

/// log P_t f(x) + scale [ (L1+L3)|z|^4/2 + (L2+L4)|z|^2/2
///                       + exp(-(nu N0^2 - trQQ/2) t + |y|^2 + nu N0^2) sqrt(K1) |z| dlogf_sup ].
/// `scale` < 1 shrinks the constants for the forced-failure check.
double mlh_rhs(double logPtf_x, double z_norm, double dlogf_sup, double t, double y_norm,
               const BoundConstants& c, double scale = 1.0);

}  // namespace sns

#endif  // SNS_BOUNDS_HPP
