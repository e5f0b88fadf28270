#ifndef SNS_TEST_FUNCTIONS_HPP
#define SNS_TEST_FUNCTIONS_HPP

#include "sns/spectral.hpp"

#include <string>

namespace sns {

/// Bounded smooth observables f >= 1 with closed-form sup bounds.
///
///   gauss_bump:          f(u) = offset + a exp(-|pi_m u - c|^2 / s^2)
///   coordinate_sigmoid:  f(u) = offset + a sigma(<u - c, e> / s),  sigma(r) = 1/(1 + e^{-r})
///
/// `offset` defaults to 1; amplitude 0 gives the constant function offset.
struct TestFunction {
  enum class Kind { gauss_bump, coordinate_sigmoid };

  Kind kind = Kind::gauss_bump;
  Field center;
  Field direction;  // unit field, coordinate_sigmoid only
  double scale = 1.0;
  double amplitude = 1.0;
  double offset = 1.0;
  int projection = 0;  // radius m of pi_m, gauss_bump only; 0 means the full grid

  static TestFunction gauss_bump(Field center, double scale, double amplitude, int projection = 0);
  /// `direction` is normalized here.
  static TestFunction coordinate_sigmoid(Field center, Field direction, double scale,
                                         double amplitude);
  static TestFunction constant(const GridPtr& grid, double value);

  double operator()(const Field::Coefficients& u) const;
  double operator()(const Field& u) const { return (*this)(u.amps()); }

  /// Gradient Df(u) with respect to the L2 inner product.
  Field gradient(const Field& u) const;

  double sup_f() const;
  double sup_Df() const;
  /// Bound on |D log f|, using f >= offset.
  double sup_DlogF() const;

  /// Throws std::invalid_argument unless the parameters give f >= 1.
  void validate() const;

  std::string kind_name() const;
};

}  // namespace sns

#endif  // SNS_TEST_FUNCTIONS_HPP
