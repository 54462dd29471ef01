#include "pm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pm/error.hpp"
#include "pm/quadrature.hpp"

namespace pm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

double golden_max(const std::function<double(double)>& f, double a, double b, int iters) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

size_t cell_of(const std::vector<double>& cum, double v) {
  size_t i = 0;
  while (i + 2 < cum.size() && v >= cum[i + 1]) ++i;
  return i;
}

}  // namespace

WeightFunction constant_weight() {
  return {[](double) { return 1.0; }, "const"};
}

WeightFunction symmetric_power_weight(double beta) {
  if (beta < 0) fail(errc::config_error, "symmetric_power_weight: beta must be >= 0");
  return {[beta](double s) { return std::pow(std::min(s, 1.0 - s), -beta); },
          "sympow(" + std::to_string(beta) + ")"};
}

ShapingFunction identity_shaping(const InputChannelPair& pair) {
  auto sup = pair.input->support();
  ShapingFunction f;
  f.rho = f.inv = [](double s) { return s; };
  f.deriv = [](double) { return 1.0; };
  f.lo = sup.lo;
  f.hi = sup.hi;
  f.label = "identity";
  return f;
}

ShapingFunction power_shaping(double beta) {
  if (beta <= 0) fail(errc::config_error, "power_shaping: beta must be positive");
  ShapingFunction f;
  f.rho = [beta](double s) { return std::pow(s, -beta); };
  f.inv = [beta](double t) { return std::pow(t, -1.0 / beta); };
  f.deriv = [beta](double s) { return -beta * std::pow(s, -beta - 1.0); };
  f.lo = 0.0;
  f.hi = kInf;
  f.label = "pow(-" + std::to_string(beta) + ")";
  return f;
}

void validate_shaping(const ShapingFunction& rho, const InputChannelPair& pair) {
  const int n = 200;
  std::vector<double> qs = {1e-12, 1e-9};
  for (int i = 1; i <= n; ++i) qs.push_back(static_cast<double>(i) / (n + 1));
  qs.push_back(1.0 - 1e-9);
  qs.push_back(1.0 - 1e-12);
  double prev = 0.0;
  int dir = 0;
  bool first = true;
  for (double q : qs) {
    double x = pair.input->inv_cdf(q);
    if (x <= rho.lo || x >= rho.hi) fail(errc::config_error, "shaping: input support outside domain");
    double s = rho.rho(x);
    if (!std::isfinite(s)) fail(errc::config_error, "shaping: non-finite value");
    double back = rho.inv(s);
    if (std::abs(back - x) > 1e-12 * std::max(1.0, std::abs(x)))
      fail(errc::config_error, "shaping: inverse identity fails at x=" + std::to_string(x));
    double d = rho.deriv(x);
    if (d == 0 || !std::isfinite(d)) fail(errc::config_error, "shaping: degenerate derivative");
    // density of rho(X) must stay bounded
    double fs = pair.input->density(x) / std::abs(d);
    if (!(fs < 1e6)) fail(errc::config_error, "shaping: unbounded shaped density");
    if (!first) {
      int step = s > prev ? 1 : (s < prev ? -1 : 0);
      if (step == 0 || (dir != 0 && step != dir))
        fail(errc::config_error, "shaping: not strictly monotone");
      dir = step;
    }
    first = false;
    prev = s;
  }
}

std::string ThresholdReport::serialize() const {
  std::ostringstream os;
  os << "kind " << kind << "\n";
  os << "rho " << rho_label << "\n";
  os << "value_bits " << value_bits << "\n";
  os << "finite " << (finite ? 1 : 0) << "\n";
  os << "argmax_s " << argmax_s << "\n";
  os << "argmax_t " << argmax_t << "\n";
  os << "grid " << grid << "\n";
  os << "monotone " << (monotone_ok ? 1 : 0) << "\n";
  if (!q_schedule.empty()) {
    os << "q_schedule";
    for (double q : q_schedule) os << " " << q;
    os << "\nq_values";
    for (double v : q_values) os << " " << v;
    os << "\n";
  }
  return os.str();
}

double lipschitz_global(const std::function<double(double)>& f, double s, double t) {
  if (s == t) fail(errc::config_error, "lipschitz_global: s == t");
  return std::abs(f(s) - f(t)) / std::abs(s - t);
}

double lipschitz_local(const std::function<double(double)>& f, double s) {
  double h = 1e-4 * std::max(1.0, std::abs(s));
  double prev = kInf, est = 0.0;
  for (int i = 0; i < 20; ++i) {
    est = std::abs(f(s + h) - f(s - h)) / (2.0 * h);
    if (std::isfinite(prev) && std::abs(est - prev) <= 1e-6 * std::max(1.0, std::abs(est)))
      return est;
    prev = est;
    h *= 0.5;
    if (h < 1e-12 * std::max(1.0, std::abs(s))) break;
  }
  return est;
}

double omega_original(const InputChannelPair& pair, double x, double y) {
  if (pair.is_dmc()) fail(errc::config_error, "omega_original: continuous pairs only");
  return pair.inverse(y)->inv_cdf(pair.input->cdf(x));
}

double omega_normalized(const InputChannelPair& pair, double s, double phi) {
  if (pair.is_dmc()) {
    size_t y = cell_of(pair.out_cum, phi);
    double acc = 0.0;
    for (size_t x = 0; x + 1 < pair.in_cum.size(); ++x) {
      double post = pair.posterior[y][x];
      if (s <= acc + post || x + 2 == pair.in_cum.size()) {
        double px = pair.in_cum[x + 1] - pair.in_cum[x];
        if (post <= 0) return pair.in_cum[x];
        return pair.in_cum[x] + (s - acc) * px / post;
      }
      acc += post;
    }
    return 1.0;
  }
  double y = pair.output->inv_cdf(phi);
  return pair.input->cdf(pair.inverse(y)->inv_cdf(s));
}

namespace {

// Control nodes for the expectation: (value, weight) over Phi ~ U(0,1) in
// normalized space, over Y ~ P_Y in original space; DMC outputs enumerate.
std::vector<std::pair<double, double>> control_nodes(const InputChannelPair& pair,
                                                     KernelSpace space, int n) {
  std::vector<std::pair<double, double>> nodes;
  if (pair.is_dmc()) {
    for (size_t y = 0; y + 1 < pair.out_cum.size(); ++y)
      if (pair.out_pmf[y] > 0)
        nodes.push_back({0.5 * (pair.out_cum[y] + pair.out_cum[y + 1]), pair.out_pmf[y]});
    return nodes;
  }
  for (auto& [u, w] : gauss_legendre(n, 0.0, 1.0))
    nodes.push_back({space == KernelSpace::normalized ? u : pair.output->inv_cdf(u), w});
  return nodes;
}

// local slope with the step bounded away from the domain edges
double local_slope(const std::function<double(double)>& f, double s, double lo, double hi) {
  double h = std::min({1e-4 * std::max(1.0, std::abs(s)), (s - lo) * 0.5, (hi - s) * 0.5});
  if (h <= 0) return 0.0;
  double prev = kInf, est = 0.0;
  for (int i = 0; i < 20; ++i) {
    est = std::abs(f(s + h) - f(s - h)) / (2.0 * h);
    if (std::isfinite(prev) && std::abs(est - prev) <= 1e-6 * std::max(1.0, std::abs(est)))
      return est;
    prev = est;
    h *= 0.5;
    if (h < 1e-12 * std::max(1.0, std::abs(s))) break;
  }
  return est;
}

double weighted_slope_expectation(const InputChannelPair& pair, const WeightFunction& rho,
                                  double s, KernelSpace space,
                                  const std::vector<std::pair<double, double>>& nodes) {
  double rs = rho.rho(s);
  double lo, hi;
  if (space == KernelSpace::normalized) {
    lo = 0.0;
    hi = 1.0;
  } else {
    auto sup = pair.input->support();
    lo = std::isfinite(sup.lo) ? sup.lo : -1e300;
    hi = std::isfinite(sup.hi) ? sup.hi : 1e300;
  }
  double acc = 0.0;
  for (auto& [c, w] : nodes) {
    std::function<double(double)> om;
    if (pair.is_dmc()) {
      double phi = c;
      om = [&pair, phi](double x) { return omega_normalized(pair, x, phi); };
    } else {
      double y = space == KernelSpace::normalized ? pair.output->inv_cdf(c) : c;
      auto post = pair.inverse(y);
      if (space == KernelSpace::normalized)
        om = [&pair, post](double x) { return pair.input->cdf(post->inv_cdf(x)); };
      else
        om = [&pair, post](double x) { return post->inv_cdf(pair.input->cdf(x)); };
    }
    acc += w * rho.rho(om(s)) / rs * local_slope(om, s, lo, hi);
  }
  return acc;
}

}  // namespace

ThresholdReport r_dagger(const InputChannelPair& pair, const WeightFunction& rho, int s_grid,
                         int quad_nodes, KernelSpace space) {
  if (s_grid < 16) fail(errc::config_error, "r_dagger: s_grid too small");
  if (space == KernelSpace::original && pair.is_dmc())
    fail(errc::config_error, "r_dagger: original space needs a continuous pair");
  auto nodes = control_nodes(pair, space, quad_nodes);
  auto s_of_u = [&](double u) {
    return space == KernelSpace::normalized ? u : pair.input->inv_cdf(u);
  };
  auto E_at_u = [&](double u) {
    return weighted_slope_expectation(pair, rho, s_of_u(u), space, nodes);
  };

  double sup = -kInf, arg_u = 0.5;
  for (int i = 1; i <= s_grid; ++i) {
    double u = static_cast<double>(i) / (s_grid + 1);
    double e = E_at_u(u);
    if (e > sup) {
      sup = e;
      arg_u = u;
    }
  }
  double step = 1.0 / (s_grid + 1);

  ThresholdReport rep;
  rep.kind = "r_dagger";
  rep.rho_label = rho.label;
  rep.grid = s_grid;
  rep.argmax_s = s_of_u(arg_u);

  // the sup over the open interval may diverge toward a boundary: probe
  // geometrically (before any refinement) and flag unbounded growth instead
  // of reporting whatever the finite grid happened to see
  for (double edge : {0.0, 1.0}) {
    double u0 = edge == 0.0 ? step : 1.0 - step;
    auto at = [&](double frac) { return edge == 0.0 ? step * frac : 1.0 - step * frac; };
    double e0 = E_at_u(u0), e1 = E_at_u(at(1.0 / 8)), e2 = E_at_u(at(1.0 / 64));
    if (e1 > 2.0 * e0 && e2 > 2.0 * e1 && e2 > 10.0 * std::max(1.0, sup)) {
      rep.finite = false;
      rep.value_bits = -kInf;
      rep.argmax_s = edge;
      return rep;
    }
    if (e2 > sup) {
      sup = e2;
      arg_u = at(1.0 / 64);
    }
    if (e1 > sup) {
      sup = e1;
      arg_u = at(1.0 / 8);
    }
  }

  double ustar =
      golden_max(E_at_u, std::max(1e-12, arg_u - step), std::min(1.0 - 1e-12, arg_u + step), 32);
  double estar = E_at_u(ustar);
  if (estar > sup) {
    sup = estar;
    arg_u = ustar;
    rep.argmax_s = s_of_u(arg_u);
  }
  rep.finite = true;
  rep.value_bits = -std::log2(sup);
  return rep;
}

std::vector<double> default_q_schedule() {
  std::vector<double> q;
  for (int k = 0; k <= 8; ++k) q.push_back(std::ldexp(1.0, -k));
  return q;
}

namespace {

struct StarContext {
  const InputChannelPair* pair;
  const ShapingFunction* rho;
  std::vector<double> ys, yw;  // output nodes and weights
};

// g_y(s) evaluated through the input quantile u (rho^{-1}(s) = F_X^{-1}(u)).
double g_at(const StarContext& cx, double u, double y) {
  return cx.rho->rho(cx.pair->inverse(y)->inv_cdf(u));
}

double s_at(const StarContext& cx, double u) { return cx.rho->rho(cx.pair->input->inv_cdf(u)); }

double rq_of_pair(const StarContext& cx, double ua, double ub, double q) {
  double sa = s_at(cx, ua), sb = s_at(cx, ub);
  if (sa == sb) return 0.0;
  double acc = 0.0;
  for (size_t j = 0; j < cx.ys.size(); ++j) {
    double d = std::abs(g_at(cx, ua, cx.ys[j]) - g_at(cx, ub, cx.ys[j])) / std::abs(sa - sb);
    acc += cx.yw[j] * (d > 0 ? std::pow(d, q) : 0.0);
  }
  return acc;
}

}  // namespace

ThresholdReport r_star(const InputChannelPair& pair, const ShapingFunction& rho,
                       std::vector<double> q_schedule, int grid, int quad_nodes) {
  if (pair.is_dmc()) fail(errc::config_error, "r_star: continuous pairs only");
  if (grid < 16) fail(errc::config_error, "r_star: grid too small");
  validate_shaping(rho, pair);
  if (q_schedule.empty()) q_schedule = default_q_schedule();
  for (size_t k = 1; k < q_schedule.size(); ++k)
    if (q_schedule[k] >= q_schedule[k - 1] || q_schedule[k] <= 0)
      fail(errc::config_error, "r_star: q_schedule must be decreasing positives");

  StarContext cx{&pair, &rho, {}, {}};
  for (auto& [u, w] : gauss_legendre(quad_nodes, 0.0, 1.0)) {
    cx.ys.push_back(pair.output->inv_cdf(u));
    cx.yw.push_back(w);
  }

  // grid of input quantile levels; pair candidates at dyadic index gaps keep
  // both local (t -> s) and global pairs without the full quadratic sweep
  std::vector<double> us(grid);
  for (int i = 0; i < grid; ++i) us[i] = static_cast<double>(i + 1) / (grid + 1);
  std::vector<std::pair<int, int>> cand;
  for (int gap = 1; gap < grid; gap *= 2)
    for (int i = 0; i + gap < grid; i += std::max(1, gap / 2)) cand.push_back({i, i + gap});

  // precompute g matrix [node][grid]
  std::vector<std::vector<double>> W(cx.ys.size(), std::vector<double>(grid));
  for (size_t j = 0; j < cx.ys.size(); ++j) {
    auto post = pair.inverse(cx.ys[j]);
    for (int i = 0; i < grid; ++i) W[j][i] = rho.rho(post->inv_cdf(us[i]));
  }
  std::vector<double> svals(grid);
  for (int i = 0; i < grid; ++i) svals[i] = s_at(cx, us[i]);

  ThresholdReport rep;
  rep.kind = "r_star";
  rep.rho_label = rho.label;
  rep.grid = grid;
  rep.q_schedule = q_schedule;

  double final_ua = us.front(), final_ub = us.back();
  for (double q : q_schedule) {
    double rq = -kInf;
    int bi = 0, bj = 1;
    for (auto& [i, j] : cand) {
      if (svals[i] == svals[j]) continue;
      double acc = 0.0;
      double inv_ds = 1.0 / std::abs(svals[i] - svals[j]);
      for (size_t n = 0; n < cx.ys.size(); ++n) {
        double d = std::abs(W[n][i] - W[n][j]) * inv_ds;
        acc += cx.yw[n] * (d > 0 ? std::pow(d, q) : 0.0);
      }
      if (acc > rq) {
        rq = acc;
        bi = i;
        bj = j;
      }
    }
    // local refinement of the extremal pair in quantile coordinates
    double ua = us[bi], ub = us[bj];
    double rad = 1.0 / (grid + 1);
    for (int round = 0; round < 3; ++round) {
      double best_ua = ua, best_ub = ub;
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
          double ca = std::clamp(ua + a * rad / 2, 1e-9, 1.0 - 1e-9);
          double cb = std::clamp(ub + b * rad / 2, 1e-9, 1.0 - 1e-9);
          if (ca == cb) continue;
          double v = rq_of_pair(cx, ca, cb, q);
          if (v > rq) {
            rq = v;
            best_ua = ca;
            best_ub = cb;
          }
        }
      ua = best_ua;
      ub = best_ub;
      rad /= 4;
    }
    rep.q_values.push_back(-std::log2(rq) / q);
    final_ua = ua;
    final_ub = ub;
  }

  for (size_t k = 1; k < rep.q_values.size(); ++k)
    if (rep.q_values[k] < rep.q_values[k - 1] - 0.02) rep.monotone_ok = false;
  rep.value_bits = rep.q_values.back();
  rep.finite = std::isfinite(rep.value_bits);
  rep.argmax_s = s_at(cx, final_ua);
  rep.argmax_t = s_at(cx, final_ub);
  return rep;
}

ThresholdReport r_star_separable(const InputChannelPair& pair, const ShapingFunction& rho,
                                 const std::function<double(double)>& u,
                                 const std::function<double(double)>& v) {
  if (pair.is_dmc()) fail(errc::config_error, "r_star_separable: continuous pairs only");
  validate_shaping(rho, pair);

  // verify g_y(s) = u(s) v(y) + q(y) on a 32x32 grid, with q(y) implied by the
  // first s column
  const int m = 32;
  std::vector<double> us(m), ys(m);
  for (int i = 0; i < m; ++i) {
    us[i] = static_cast<double>(i + 1) / (m + 1);
    ys[i] = pair.output->inv_cdf(us[i]);
  }
  StarContext cx{&pair, &rho, {}, {}};
  for (int j = 0; j < m; ++j) {
    double qy = g_at(cx, us[0], ys[j]) - u(s_at(cx, us[0])) * v(ys[j]);
    for (int i = 1; i < m; ++i) {
      double g = g_at(cx, us[i], ys[j]);
      double model = u(s_at(cx, us[i])) * v(ys[j]) + qy;
      if (std::abs(g - model) > 1e-9 * std::max(1.0, std::abs(g)))
        fail(errc::not_separable, "u(s)v(y)+q(y) identity fails at s=" +
                                      std::to_string(s_at(cx, us[i])) + " y=" + std::to_string(ys[j]));
    }
  }

  auto sup = pair.output->support();
  double elog =
      integrate_adaptive([&](double y) { return pair.output->density(y) * std::log2(std::abs(v(y))); },
                         sup.lo, sup.hi, 1e-9, 1e-9)
          .value;

  auto du_at_u = [&](double uu) {
    double s = s_at(cx, uu);
    double h = 1e-6 * std::max(1.0, std::abs(s));
    return std::abs(u(s + h) - u(s - h)) / (2.0 * h);
  };
  const int grid = 512;
  double best = -kInf, arg_u = 0.5;
  for (int i = 1; i <= grid; ++i) {
    double uu = static_cast<double>(i) / (grid + 1);
    double d = du_at_u(uu);
    if (d > best) {
      best = d;
      arg_u = uu;
    }
  }
  double step = 1.0 / (grid + 1);
  double ustar = golden_max(du_at_u, std::max(1e-12, arg_u - step), std::min(1.0 - 1e-12, arg_u + step), 40);
  if (du_at_u(ustar) > best) {
    best = du_at_u(ustar);
    arg_u = ustar;
  }

  ThresholdReport rep;
  rep.kind = "r_star_separable";
  rep.rho_label = rho.label;
  rep.grid = grid;
  rep.value_bits = -elog - std::log2(best);
  rep.finite = std::isfinite(rep.value_bits);
  rep.argmax_s = s_at(cx, arg_u);
  return rep;
}

double tail_function(const ScalarDistribution& dist, double ell) {
  if (ell < 0) fail(errc::config_error, "tail_function: ell must be >= 0");
  if (ell == 0) return 1.0;
  const int n = 1024;
  auto window = [&](double x) { return dist.cdf(x + ell) - dist.cdf(x); };
  std::vector<double> xs;
  xs.reserve(2 * n);
  for (int i = 1; i <= n; ++i) {
    double x = dist.inv_cdf(static_cast<double>(i) / (n + 1));
    xs.push_back(x);
    xs.push_back(x - ell);
  }
  std::sort(xs.begin(), xs.end());
  size_t best = 0;
  double wbest = -1.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double w = window(xs[i]);
    if (w > wbest) {
      wbest = w;
      best = i;
    }
  }
  double a = xs[best > 0 ? best - 1 : 0];
  double b = xs[std::min(xs.size() - 1, best + 1)];
  if (b > a) wbest = std::max(wbest, window(golden_max(window, a, b, 48)));
  return std::clamp(1.0 - wbest, 0.0, 1.0);
}

namespace {

class ShapedDist final : public ScalarDistribution {
 public:
  ShapedDist(DistPtr base, ShapingFunction rho) : base_(std::move(base)), rho_(std::move(rho)) {
    double q1 = base_->inv_cdf(1e-9), q2 = base_->inv_cdf(1.0 - 1e-9);
    increasing_ = rho_.rho(q2) > rho_.rho(q1);
  }
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return rho_.label + "(" + base_->label() + ")"; }
  SupportInterval support() const override {
    double a = inv_cdf(1e-14), b = inv_cdf(1.0 - 1e-14);
    return {a, b};
  }
  double cdf(double s) const override {
    double x = rho_.inv(s);
    double F = base_->cdf(x);
    return increasing_ ? F : 1.0 - F;
  }
  double inv_cdf(double t) const override {
    return rho_.rho(base_->inv_cdf(increasing_ ? t : 1.0 - t));
  }
  double density(double s) const override {
    double x = rho_.inv(s);
    double d = rho_.deriv(x);
    return d == 0 ? 0.0 : base_->density(x) / std::abs(d);
  }

 private:
  DistPtr base_;
  ShapingFunction rho_;
  bool increasing_;
};

}  // namespace

DistPtr shape_distribution(DistPtr base, const ShapingFunction& rho) {
  return std::make_shared<ShapedDist>(std::move(base), rho);
}

double target_error_schedule(double rate, const ThresholdReport& report,
                             const ScalarDistribution& shaped_dist, int n, double margin) {
  if (margin < 0 || margin >= 1) fail(errc::config_error, "target_error_schedule: margin in [0,1)");
  if (n < 1) fail(errc::config_error, "target_error_schedule: n must be >= 1");
  if (!report.finite || rate >= report.value_bits)
    fail(errc::rate_above_threshold,
         "rate " + std::to_string(rate) + " not below threshold " + std::to_string(report.value_bits));
  double ell = std::exp2(static_cast<double>(n) * (report.value_bits - rate) * (1.0 - margin));
  return tail_function(shaped_dist, ell);
}

double psi_diagnostic(const InputChannelPair& pair, const WeightFunction& rho, double s, double t,
                      double r, int quad_nodes) {
  if (r >= 1.0) return kInf;
  auto J = [&](double a, double b) {
    if (a > b) std::swap(a, b);
    double best = std::max(rho.rho(a), rho.rho(b));
    for (int i = 1; i < 256; ++i) best = std::max(best, rho.rho(a + (b - a) * i / 256.0));
    return best;
  };
  auto nodes = control_nodes(pair, KernelSpace::normalized, quad_nodes);
  auto K = [&](double x) {
    double acc = 0.0;
    for (auto& [phi, w] : nodes) acc += w * J(x, omega_normalized(pair, x, phi));
    return acc;
  };
  return (K(s) + K(t)) / (1.0 - r) + 2.0 * J(s, t);
}

}  // namespace pm
