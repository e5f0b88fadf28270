#include "sns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace sns {

void NeumaierSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double neumaier_sum(std::span<const double> xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

Estimate mean_estimate(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("mean_estimate: need at least two samples");
  const double n = double(xs.size());
  const bool constant = std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs[0]; });
  const double mean = constant ? xs[0] : neumaier_sum(xs) / n;
  NeumaierSum sq;
  for (double x : xs) sq.add((x - mean) * (x - mean));
  Estimate e;
  e.mean = mean;
  e.std_error = std::sqrt(std::max(0.0, sq.value()) / (n - 1.0) / n);
  e.n = static_cast<long>(xs.size());
  e.ci_lo = mean - 1.96 * e.std_error;
  e.ci_hi = mean + 1.96 * e.std_error;
  return e;
}

double log_sum_exp(std::span<const double> xs) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : xs) peak = std::max(peak, x);
  if (!std::isfinite(peak)) return peak;
  NeumaierSum s;
  for (double x : xs) s.add(std::exp(x - peak));
  return peak + std::log(s.value());
}

double log_mean_exp(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : xs) peak = std::max(peak, x);
  if (!std::isfinite(peak)) return peak;
  NeumaierSum s;
  for (double x : xs) s.add(std::exp(x - peak));
  // Dividing before the log keeps a constant sample exact.
  return peak + std::log(s.value() / double(xs.size()));
}

LogMeanEstimate log_mean_exp_estimate(std::span<const double> xs, int resamples,
                                      std::uint64_t seed) {
  if (xs.size() < 2) throw std::invalid_argument("log_mean_exp_estimate: need at least two samples");
  if (resamples < 2) throw std::invalid_argument("log_mean_exp_estimate: need resamples >= 2");
  LogMeanEstimate out;
  out.n = static_cast<long>(xs.size());
  out.log_mean = log_mean_exp(xs);

  std::vector<double> scaled(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) scaled[i] = std::exp(xs[i] - out.log_mean);
  out.relative_std_error = mean_estimate(scaled).std_error;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  std::vector<double> boot(static_cast<std::size_t>(resamples));
  std::vector<double> draw(xs.size());
  for (double& b : boot) {
    for (double& d : draw) d = xs[pick(rng)];
    b = log_mean_exp(draw);
  }
  std::sort(boot.begin(), boot.end());
  const auto quantile = [&](double q) {
    const double pos = q * double(boot.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, boot.size() - 1);
    return boot[lo] + (pos - double(lo)) * (boot[hi] - boot[lo]);
  };
  out.log_ci_lo = quantile(0.025);
  out.log_ci_hi = quantile(0.975);
  return out;
}

double effective_sample_size(std::span<const double> weights) {
  NeumaierSum s, s2;
  for (double w : weights) {
    s.add(w);
    s2.add(w * w);
  }
  return s2.value() > 0.0 ? s.value() * s.value() / s2.value() : 0.0;
}

}  // namespace sns
