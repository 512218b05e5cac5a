#pragma once

#include <cstdint>
#include <vector>

namespace nsb {

// One-sided 99% normal quantile.
inline constexpr double kZ99 = 2.3263478740408408;

double normal_cdf(double x);

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

// Wilson score bounds for a binomial proportion; each side one-sided at z.
Interval wilson_bounds(std::uint64_t successes, std::uint64_t trials, double z = kZ99);

// sup |F_n - Phi| for the given sample (sorted in place).
double ks_statistic_normal(std::vector<double>& sample);

struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double m4 = 0.0;        // fourth central moment
};

Moments sample_moments(const std::vector<double>& xs);

// Welford accumulator; merge() combines partial results in a fixed order.
class RunningMoments {
 public:
  void add(double x);
  void merge(const RunningMoments& o);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace nsb
