#ifndef SNS_STATS_HPP
#define SNS_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace sns {

/// Monte Carlo summary of a sample mean.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Compensated (Neumaier) summation. Adding the same values in the same
/// order always gives the same result.
class NeumaierSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double neumaier_sum(std::span<const double> xs);

/// Sample mean, standard error and normal 95% interval. Requires n >= 2.
Estimate mean_estimate(std::span<const double> xs);

/// log sum exp(x_i), exact for -inf entries; -inf for an empty input.
double log_sum_exp(std::span<const double> xs);

/// log((1/n) sum exp(x_i)).
double log_mean_exp(std::span<const double> xs);

/// Mean of exp(x_i) evaluated in log space. `log_mean` is the point
/// estimate; the interval comes from a percentile bootstrap of log_mean_exp.
struct LogMeanEstimate {
  double log_mean = 0.0;
  double log_ci_lo = 0.0;
  double log_ci_hi = 0.0;
  /// Standard error of the mean of exp(x_i), scaled by exp(-log_mean).
  double relative_std_error = 0.0;
  long n = 0;
};

LogMeanEstimate log_mean_exp_estimate(std::span<const double> xs, int resamples,
                                      std::uint64_t seed);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

}  // namespace sns

#endif  // SNS_STATS_HPP
