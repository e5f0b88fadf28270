#ifndef SNS_IDENTITIES_HPP
#define SNS_IDENTITIES_HPP

#include "sns/bilinear.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sns {

struct IdentityCheck {
  std::string name;
  double tolerance = 0.0;
  long evaluations = 0;
  long violations = 0;
  double worst = 0.0;  // largest relative defect seen
};

struct IdentityReport {
  int N = 0;
  int N0 = 0;
  long trials = 0;
  std::uint64_t seed = 0;
  bool corrupt_projection = false;
  std::vector<IdentityCheck> checks;

  long violations() const;
  bool pass() const { return violations() == 0; }
};

struct IdentityOptions {
  long trials = 10000;
  std::uint64_t seed = 1;
  double skew_tolerance = 1e-10;   // relative, bilinear identities
  double mode_tolerance = 1e-14;   // relative per mode, projection and splitting
  bool corrupt_projection = false; // fault injection: only 90% of the gradient part is removed
};

/// Algebraic suite on random triples: <x, B(y, x)> = 0, <x, B(y, z)> = -<z, B(y, x)>,
/// Leray idempotence and complement per mode, exact low/high splitting, and the
/// per-mode frequency inequalities for alpha in {1/4, 1/2, 1, 3/2}.
IdentityReport run_identity_suite(const BilinearWorkspace<double>& ws, int N0,
                                  const IdentityOptions& options = {});

}  // namespace sns

#endif  // SNS_IDENTITIES_HPP
