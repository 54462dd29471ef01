#include "pm/properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pm/error.hpp"

namespace pm {
namespace {

// Continued-fraction probe: does |r| admit a convergent p/q, q <= qmax, within
// atol? If so the ratio is indistinguishable from a rational at working
// accuracy and the irrationality claim cannot be supported.
bool looks_rational(double r, double atol = 1e-12, long qmax = 1000000) {
  double x = std::abs(r);
  long p0 = 1, q0 = 0, p1 = static_cast<long>(std::floor(x)), q1 = 1;
  double frac = x - std::floor(x);
  for (int it = 0; it < 64; ++it) {
    if (std::abs(x - static_cast<double>(p1) / q1) < atol) return q1 <= qmax;
    if (frac < 1e-15) return true;
    double inv = 1.0 / frac;
    long a = static_cast<long>(std::floor(inv));
    frac = inv - std::floor(inv);
    long p2 = a * p1 + p0, q2 = a * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (q1 > qmax) return false;
  }
  return false;
}

}  // namespace

FixedPointReport fixed_point_scan(const MatchingKernel& kernel, int grid_size, double tol) {
  if (grid_size < 100) fail(errc::config_error, "fixed_point_scan: grid_size must be >= 100");
  const auto& pair = kernel.pair();
  std::vector<double> phis;
  if (pair.is_dmc()) {
    for (size_t y = 0; y + 1 < pair.out_cum.size(); ++y)
      if (pair.out_pmf[y] > 0) phis.push_back(0.5 * (pair.out_cum[y] + pair.out_cum[y + 1]));
  } else {
    const int m = 1000;
    for (int j = 1; j <= m; ++j) phis.push_back(static_cast<double>(j) / (m + 1));
  }
  FixedPointReport rep;
  rep.probe_grid_size = grid_size;
  rep.tolerance = tol;
  for (int i = 1; i <= grid_size; ++i) {
    double th = static_cast<double>(i) / (grid_size + 1);
    bool fixed = true;
    for (double ph : phis) {
      UnitValue next = kernel.forward_norm(UnitValue(th, 64), UnitValue(ph, 64));
      if (std::abs(next.to_double() - th) > tol) {
        fixed = false;
        break;
      }
    }
    if (fixed) rep.fixed_points.push_back(th);
  }
  if (pair.is_dmc()) {
    // The DMC kernel is piecewise linear on the input cells: solve each cell
    // for its exact fixed-point candidate so isolated points between grid
    // nodes (e.g. a cell boundary like theta = 1/2) are not missed.
    for (size_t x = 0; x + 1 < pair.in_cum.size(); ++x) {
      double lo = pair.in_cum[x], hi = pair.in_cum[x + 1];
      if (hi <= lo) continue;
      double t0 = lo + 0.25 * (hi - lo), t1 = lo + 0.75 * (hi - lo);
      double k0 = kernel.forward_norm(UnitValue(t0, 64), UnitValue(phis.front(), 64)).to_double();
      double k1 = kernel.forward_norm(UnitValue(t1, 64), UnitValue(phis.front(), 64)).to_double();
      double slope = (k1 - k0) / (t1 - t0);
      if (std::abs(slope - 1.0) < 1e-12) continue;  // slope-1 cells are covered by the grid
      double cand = (k0 - slope * t0) / (1.0 - slope);
      // 0 and 1 are fixed by every conditional cdf; only interior points count
      if (cand < lo - tol || cand > hi + tol || cand <= tol || cand >= 1.0 - tol) continue;
      bool fixed = true;
      for (double ph : phis) {
        UnitValue next = kernel.forward_norm(UnitValue(cand, 64), UnitValue(ph, 64));
        if (std::abs(next.to_double() - cand) > tol) {
          fixed = false;
          break;
        }
      }
      if (fixed) rep.fixed_points.push_back(cand);
    }
    std::sort(rep.fixed_points.begin(), rep.fixed_points.end());
    auto last = std::unique(rep.fixed_points.begin(), rep.fixed_points.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; });
    rep.fixed_points.erase(last, rep.fixed_points.end());
  }
  return rep;
}

bool dominated_by(const std::vector<double>& p, const std::vector<double>& q) {
  const double eps = 1e-12;
  double fp = 0.0, fq = 0.0;
  for (size_t k = 0; k + 1 < p.size(); ++k) {
    fp += p[k];
    fq += q[k];
    if (fq > eps && fq < 1.0 - eps && fp >= fq - eps) return false;
  }
  return true;
}

std::vector<size_t> dominance_permutation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) fail(errc::config_error, "dominance_permutation: alphabet size mismatch");
  bool same = true;
  for (size_t i = 0; i < p.size(); ++i)
    if (std::abs(p[i] - q[i]) > 1e-15) same = false;
  if (same) fail(errc::identical_distributions, "dominance_permutation: p equals q");
  std::vector<size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return p[a] - q[a] > p[b] - q[b]; });
  return idx;
}

DmcPropertyReport dmc_property_check(const MatchingKernel& kernel) {
  const auto& pair = kernel.pair();
  if (!pair.is_dmc()) fail(errc::not_discrete, "dmc_property_check needs a DMC pair");
  size_t nx = pair.in_cum.size() - 1, ny = pair.out_pmf.size();
  std::vector<double> px(nx);
  for (size_t x = 0; x < nx; ++x) {
    px[x] = pair.in_cum[x + 1] - pair.in_cum[x];
    if (px[x] <= 0) fail(errc::config_error, "dmc_property_check: zero-mass input symbol");
  }

  DmcPropertyReport rep;
  const auto& m = pair.channel->matrix();
  rep.b1 = true;
  for (const auto& row : m)
    for (double v : row)
      if (v <= 0) rep.b1 = false;

  std::vector<size_t> live;
  for (size_t y = 0; y < ny; ++y)
    if (pair.out_pmf[y] > 0) live.push_back(y);

  rep.b2 = false;
  for (size_t y : live)
    if (dominated_by(px, pair.posterior[y]) || dominated_by(pair.posterior[y], px)) rep.b2 = true;
  for (size_t i = 0; i < live.size() && !rep.b2; ++i)
    for (size_t j = 0; j < live.size(); ++j)
      if (i != j && dominated_by(pair.posterior[live[i]], pair.posterior[live[j]])) rep.b2 = true;

  rep.b3_heuristic = true;
  for (size_t x = 0; x < nx && rep.b3_heuristic; ++x) {
    bool found = false;
    for (size_t i = 0; i < live.size() && !found; ++i) {
      double b0 = pair.posterior[live[i]][x] > 0 ? std::log(pair.posterior[live[i]][x] / px[x]) : 0.0;
      if (b0 == 0.0) continue;
      for (size_t j = 0; j < live.size() && !found; ++j) {
        double b1 = pair.posterior[live[j]][x] > 0 ? std::log(pair.posterior[live[j]][x] / px[x]) : 0.0;
        if (b1 == 0.0 || b0 * b1 >= 0) continue;
        if (!looks_rational(b0 / b1)) found = true;
      }
    }
    rep.b3_heuristic = found;
  }

  rep.a3 = fixed_point_scan(kernel, 10000, 1e-9).fixed_point_free();

  if (!rep.b2 && pair.mi_bits > 1e-12) {
    for (size_t y : live) {
      bool differs = false;
      for (size_t x = 0; x < nx; ++x)
        if (std::abs(pair.posterior[y][x] - px[x]) > 1e-12) differs = true;
      if (differs) {
        rep.suggested_permutation = dominance_permutation(pair.posterior[y], px);
        break;
      }
    }
  }
  return rep;
}

}  // namespace pm
