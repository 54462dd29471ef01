#pragma once
#include <functional>
#include <utility>
#include <vector>

namespace pm {

// One-sample Kolmogorov-Smirnov statistic (samples are sorted in place).
double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf);
// Critical value for the KS statistic at significance alpha.
double ks_critical(std::size_t n, double alpha);
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

struct Chi2Result {
  double stat;
  double dof;
  double critical;
  bool pass;
};
Chi2Result chi2_gof(const std::vector<long>& counts, const std::vector<double>& probs, double alpha);
double chi2_quantile(double p, double dof);

// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(long hits, long n, double z = 1.959963984540054);

double lag1_autocorr(const std::vector<double>& xs);
double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);

}  // namespace pm
