#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dualvote {

// Monte Carlo estimate of a probability or mean.
struct EstimateWithCI {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

// Bernoulli estimate with std_error = sqrt(p(1-p)/n). Throws EmptyEstimate on n = 0.
EstimateWithCI bernoulli_estimate(std::uint64_t ones, std::uint64_t n, std::uint64_t seed);

// Sample mean with the usual standard error of the mean.
EstimateWithCI mean_estimate(std::span<const double> samples, std::uint64_t seed);

// (a - b) / sqrt(se_a^2 + se_b^2); zero when both errors vanish and a == b.
double z_score(const EstimateWithCI& a, const EstimateWithCI& b);

double normal_cdf(double x);
double normal_quantile(double p);

// Two-sided Kolmogorov-Smirnov statistic of samples against a continuous cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Asymptotic Kolmogorov distribution: P(sqrt(n) D_n > x).
double kolmogorov_survival(double x);
// Critical value for the one-sample KS test at level alpha (Stephens' correction).
double ks_critical_value(std::size_t n, double alpha);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual_rms = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Empirical quantile (type 7, linear interpolation) of an unsorted sample.
double empirical_quantile(std::vector<double> samples, double q);

}  // namespace dualvote
