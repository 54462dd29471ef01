#include "pm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pm {
namespace {

// Lower regularized incomplete gamma P(a,x).
double gamma_p(double a, double x) {
  if (x < 0 || a <= 0) throw std::invalid_argument("gamma_p");
  if (x == 0) return 0.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {  // series
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // continued fraction for Q(a,x)
  double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

}  // namespace

double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double F = cdf(samples[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
  double ne = static_cast<double>(n) * m / static_cast<double>(n + m);
  return std::sqrt(-0.5 * std::log(alpha / 2.0) / ne);
}

double chi2_quantile(double p, double dof) {
  // Wilson-Hilferty start + bisection/Newton on P(dof/2, x/2).
  double z = 2.0 * p - 1.0;
  // crude normal quantile via erf inversion by bisection (p in (0,1))
  double lo = -10, hi = 10;
  for (int i = 0; i < 80; ++i) {
    double m = 0.5 * (lo + hi);
    if (std::erf(m / std::sqrt(2.0)) < z)
      lo = m;
    else
      hi = m;
  }
  double zn = 0.5 * (lo + hi);
  double x = dof * std::pow(1.0 - 2.0 / (9.0 * dof) + zn * std::sqrt(2.0 / (9.0 * dof)), 3.0);
  double a = 0.5 * dof;
  double xlo = 0.0, xhi = std::max(4.0 * x + 10.0 * dof, 100.0);
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (xlo + xhi);
    if (gamma_p(a, 0.5 * m) < p)
      xlo = m;
    else
      xhi = m;
  }
  return 0.5 * (xlo + xhi);
}

Chi2Result chi2_gof(const std::vector<long>& counts, const std::vector<double>& probs, double alpha) {
  if (counts.size() != probs.size()) throw std::invalid_argument("chi2_gof size mismatch");
  long n = 0;
  for (long c : counts) n += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double e = n * probs[i];
    if (e <= 0) continue;
    double d = counts[i] - e;
    stat += d * d / e;
  }
  double dof = static_cast<double>(counts.size() - 1);
  double crit = chi2_quantile(1.0 - alpha, dof);
  return {stat, dof, crit, stat <= crit};
}

std::pair<double, double> wilson_interval(long hits, long n, double z) {
  if (n == 0) return {0.0, 1.0};
  double p = static_cast<double>(hits) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double lag1_autocorr(const std::vector<double>& xs) {
  double m = sample_mean(xs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    den += (xs[i] - m) * (xs[i] - m);
    if (i + 1 < xs.size()) num += (xs[i] - m) * (xs[i + 1] - m);
  }
  return den > 0 ? num / den : 0.0;
}

double sample_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace pm
