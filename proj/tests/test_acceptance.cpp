// Acceptance gate: one pass/fail line per criterion, nonzero exit on any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pm/analysis.hpp"
#include "pm/error.hpp"
#include "pm/mismatch.hpp"
#include "pm/properties.hpp"
#include "pm/rng.hpp"
#include "pm/simulate.hpp"
#include "pm/stats.hpp"

using namespace pm;
using clk = std::chrono::steady_clock;

namespace {

struct Criterion {
  bool ok = true;
  std::string why;
  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
};

double seconds_since(clk::time_point start) {
  return std::chrono::duration<double>(clk::now() - start).count();
}

UnitValue uv(double d, long prec = 128) { return UnitValue(d, prec); }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. closed-form kernels on dense grids

void check_rel(Criterion& c, double got, double want, double rtol, const std::string& where) {
  double scale = std::max(1.0, std::abs(want));
  c.require(std::abs(got - want) <= rtol * scale,
            where + ": got " + num(got) + " want " + num(want));
}

Criterion criterion_kernels() {
  Criterion c;
  auto start = clk::now();

  auto awgn = make_awgn_pair(3.0, 1.0);
  for (int i = 1; i <= 100; ++i) {
    double x = -4.0 + 8.0 * i / 101.0;
    double y = 5.0 - 10.0 * i / 100.0;
    check_rel(c, kernel_eval(*awgn, x, y), 2.0 * (x - 0.75 * y), 1e-12, "awgn kernel");
  }

  auto uni = make_uniform_pair();
  for (int i = 1; i <= 100; ++i) {
    double y = 2.0 * i / 101.0;
    double t = static_cast<double>((i * 37) % 100 + 1) / 101.0;
    double x = y <= 1.0 ? t * y : (y - 1.0) + t * (2.0 - y);
    check_rel(c, kernel_eval(*uni, x, y), t, 1e-12, "uniform kernel");
  }

  auto ex = make_exponential_pair();
  for (int i = 1; i <= 100; ++i) {
    double y = 0.05 + 5.0 * i / 101.0;
    double t = static_cast<double>((i * 53) % 100 + 1) / 101.0;
    check_rel(c, kernel_eval(*ex, t * y, y), -std::log1p(-t), 1e-12, "exponential kernel");
  }

  auto bsc = make_bsc_pair(0.2);
  for (int i = 1; i <= 50; ++i) {
    double th = static_cast<double>(i) / 51.0;
    for (double ph : {0.3, 0.7}) {
      // y = 0 posterior (0.8, 0.2) on the two input cells, y = 1 the mirror
      double want = ph <= 0.5 ? (th <= 0.5 ? 1.6 * th : 0.4 * th + 0.6)
                              : (th <= 0.5 ? 0.4 * th : 1.6 * th - 0.6);
      check_rel(c, normalized_kernel_eval(*bsc, uv(th), uv(ph)).to_double(), want, 1e-12,
                "bsc normalized kernel");
    }
  }

  auto em = make_exp_mean_pair(1.0, 1.0);
  int em_pts = 0;
  for (int i = 1; i <= 60 && em_pts < 100; ++i) {
    double th = static_cast<double>(i) / 61.0;
    for (double ph : {0.15, 0.45, 0.75}) {
      double want;
      if (2.0 * th <= 1.0) {
        want = 2.0 * th * (1.0 - ph);
      } else {
        double ratio = 0.5 * (1.0 - ph) / (1.0 - th);
        if (ratio >= 1.0) continue;  // outside the a.s. support
        want = ratio;
      }
      check_rel(c, normalized_kernel_eval(*em, uv(th), uv(ph)).to_double(), want, 1e-12,
                "exp-mean normalized kernel");
      ++em_pts;
    }
  }
  c.require(em_pts >= 100, "exp-mean grid too small");

  // 2x3 DMC, posterior recomputed from Bayes' rule in the oracle
  std::vector<std::vector<double>> M = {{0.7, 0.2, 0.1}, {0.1, 0.6, 0.3}};
  std::vector<double> px = {0.4, 0.6};
  auto dmc = make_dmc_pair(discrete_dist({0.0, 1.0}, px), dmc_channel(M, "dmc23"));
  std::vector<double> py(3), out_cum(4, 0.0);
  for (int y = 0; y < 3; ++y) {
    py[y] = px[0] * M[0][y] + px[1] * M[1][y];
    out_cum[y + 1] = out_cum[y] + py[y];
  }
  std::vector<double> in_cum = {0.0, px[0], 1.0};
  for (int y = 0; y < 3; ++y) {
    double ph = 0.5 * (out_cum[y] + out_cum[y + 1]);
    std::vector<double> post = {px[0] * M[0][y] / py[y], px[1] * M[1][y] / py[y]};
    for (int i = 1; i <= 34; ++i) {
      double th = static_cast<double>(i) / 35.0;
      size_t cell = th <= in_cum[1] ? 0 : 1;
      double base = cell == 0 ? 0.0 : post[0];
      double want =
          base + post[cell] * (th - in_cum[cell]) / (in_cum[cell + 1] - in_cum[cell]);
      check_rel(c, normalized_kernel_eval(*dmc, uv(th), uv(ph)).to_double(), want, 1e-12,
                "dmc normalized kernel");
    }
  }

  double el = seconds_since(start);
  c.require(el < 1.0, "runtime " + num(el) + " s exceeds 1 s");
  return c;
}

// ---------------------------------------------------------------------------
// 2. posterior log-density exponent vs mutual information

Criterion criterion_exponent() {
  Criterion c;
  PairPtr pairs[] = {make_bsc_pair(0.2), make_awgn_pair(3.0, 1.0), make_uniform_pair(),
                     make_exponential_pair(), make_exp_mean_pair(1.0, 1.0)};
  for (const auto& p : pairs) {
    auto start = clk::now();
    auto t = run_session(p, std::nullopt, std::nullopt, 5000, 202, 0);
    double e = posterior_log_density_at_message(t);
    double el = seconds_since(start);
    c.require(std::abs(e - p->mi_bits) <= 0.05 * p->mi_bits,
              p->label + ": exponent " + num(e) + " vs mi " + num(p->mi_bits));
    c.require(el < 30.0, p->label + ": runtime " + num(el) + " s exceeds 30 s");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 3. zero-error decoding on the uniform-noise pair

Criterion criterion_zero_error() {
  Criterion c;
  auto uni = make_uniform_pair();
  SessionOptions opt;
  opt.target_rate = uni->mi_bits;
  double rate_sum = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto t = run_session(uni, std::nullopt, std::nullopt, 1000, 11, i, opt);
    auto d = decode_variable_rate(t, 0.0);
    c.require(d.contains_message, "trial " + std::to_string(i) + ": message escaped");
    // the support interval length is the product of the per-step densities
    Real logsum(0.0, t.precision);
    for (const Real& y : t.ys) logsum += log2(y <= 1.0 ? y : 2.0 - y);
    double ref = (-logsum / static_cast<double>(t.n)).to_double();
    double ulp = std::nextafter(std::abs(ref), 1e300) - std::abs(ref);
    c.require(std::abs(d.rate - ref) <= ulp,
              "trial " + std::to_string(i) + ": rate " + num(d.rate) + " vs oracle " + num(ref));
    rate_sum += d.rate;
  }
  double mean_rate = rate_sum / 100.0;
  c.require(std::abs(mean_rate - 0.7213475) <= 0.02 * 0.7213475,
            "mean rate " + num(mean_rate) + " not within 2% of 0.7213");
  return c;
}

// ---------------------------------------------------------------------------
// 4. variable-rate achievability trend on the binary symmetric pair

Criterion criterion_bsc_trend() {
  Criterion c;
  auto start = clk::now();
  auto bsc = make_bsc_pair(0.2);
  SessionOptions opt;
  opt.target_rate = bsc->mi_bits;
  const int trials = 500;
  const double delta = 1e-3;
  std::vector<double> mean_rates;
  for (int n : {500, 1000, 2000}) {
    int miss = 0;
    double rate_sum = 0.0;
    for (int i = 0; i < trials; ++i) {
      auto t = run_session(bsc, std::nullopt, std::nullopt, n, 6, 100000ull * n + i, opt);
      auto d = decode_variable_rate(t, delta, 8);
      if (!d.contains_message) ++miss;
      rate_sum += d.rate;
    }
    double pe = static_cast<double>(miss) / trials;
    c.require(pe <= 2e-3, "n=" + std::to_string(n) + ": miss rate " + num(pe));
    mean_rates.push_back(rate_sum / trials);
  }
  c.require(mean_rates[0] < mean_rates[1] && mean_rates[1] < mean_rates[2],
            "mean rates not increasing: " + num(mean_rates[0]) + ", " + num(mean_rates[1]) +
                ", " + num(mean_rates[2]));
  c.require(mean_rates[2] >= 0.85 * bsc->mi_bits,
            "mean rate at n=2000 " + num(mean_rates[2]) + " below 85% of capacity");
  double el = seconds_since(start);
  c.require(el < 300.0, "runtime " + num(el) + " s exceeds 5 min");
  return c;
}

// ---------------------------------------------------------------------------
// 5. Gaussian scheme: affine recursion identity and fixed-rate error decay

Criterion criterion_gaussian_decay() {
  Criterion c;
  auto awgn = make_awgn_pair(3.0, 1.0);

  // recursion identity x_{k+1} = 2 (x_k - 0.75 y_k)
  auto t0 = run_session(awgn, std::nullopt, uv(0.3), 20, 42, 0);
  for (int k = 0; k + 1 < 20; ++k) {
    Real expect = (t0.xs[k] - t0.ys[k] * 0.75) * 2.0;
    c.require(abs(t0.xs[k + 1] - expect).to_double() <= std::ldexp(1.0, -100),
              "recursion identity off at step " + std::to_string(k));
  }

  SessionOptions opt;
  opt.target_rate = 0.9;
  const int trials = 10000;
  std::vector<double> exps;  // -log2 p_e for n = 8, 9, ... until the floor
  for (int n = 8; n <= 20; ++n) {
    int miss = 0;
    for (int i = 0; i < trials; ++i) {
      auto t = run_session(awgn, std::nullopt, std::nullopt, n, 5, 100000ull * n + i, opt);
      if (!decode_fixed_rate(t, 0.9).contains_message) ++miss;
    }
    if (miss == 0) break;  // below the 1e4-trial resolution floor
    exps.push_back(-std::log2(static_cast<double>(miss) / trials));
  }
  c.require(exps.size() >= 5, "error floor reached too early (" +
                                  std::to_string(exps.size()) + " resolvable points)");
  // increasing over two-step windows (single steps are Poisson-noisy at
  // the small miss counts near the floor)
  for (size_t k = 0; k + 2 < exps.size(); ++k)
    c.require(exps[k + 2] > exps[k],
              "exponent not increasing at n=" + std::to_string(8 + static_cast<int>(k)));
  // super-linear growth: the mean slope over the later half beats the mean
  // slope over the earlier half, with the unresolvable floor itself counted
  // as a final point at the resolution limit
  std::vector<double> e = exps;
  e.push_back(std::log2(static_cast<double>(trials)));
  size_t m = e.size() / 2;
  double slope1 = (e[m] - e.front()) / static_cast<double>(m);
  double slope2 = (e.back() - e[m]) / static_cast<double>(e.size() - 1 - m);
  c.require(slope2 > slope1, "growth not super-linear: slopes " + num(slope1) + " then " +
                                 num(slope2));
  return c;
}

// ---------------------------------------------------------------------------
// 6. contraction thresholds

Criterion criterion_thresholds() {
  Criterion c;
  auto awgn = make_awgn_pair(3.0, 1.0);
  auto sa = r_star_separable(*awgn, identity_shaping(*awgn), [](double s) { return s; },
                             [](double) { return 0.5; });
  c.require(std::abs(sa.value_bits - awgn->mi_bits) <= 1e-6,
            "separable threshold vs capacity: " + num(sa.value_bits));

  auto uni = make_uniform_pair();
  auto su = r_star_separable(*uni, identity_shaping(*uni), [](double s) { return s; },
                             [](double y) { return y <= 1.0 ? y : 2.0 - y; });
  c.require(std::abs(su.value_bits - 0.7213475204444817) <= 1e-6,
            "separable threshold vs output entropy: " + num(su.value_bits));

  auto ex = make_exponential_pair();
  auto r2 = r_star(*ex, sqrt_inv_shaping());
  c.require(std::abs(r2.value_bits - 0.305) <= 0.005,
            "shaped exponential threshold " + num(r2.value_bits));

  auto re = r_star(*ex, identity_shaping(*ex));
  c.require(std::abs(re.value_bits - (-0.61)) <= 0.01,
            "identity exponential threshold " + num(re.value_bits));
  c.require(re.value_bits < 0.0, "identity exponential threshold not negative");

  auto rd = r_dagger(*make_bsc_pair(0.2), constant_weight());
  c.require(rd.finite && rd.value_bits <= 0.0,
            "constant-weight binary threshold " + num(rd.value_bits) + " not nonpositive");
  return c;
}

// ---------------------------------------------------------------------------
// 7. uniformity preservation of the normalized kernel

Criterion criterion_preservation() {
  Criterion c;
  const int samples = 100000;
  std::vector<std::pair<std::string, PairPtr>> zoo = {
      {"awgn", make_awgn_pair(3.0, 1.0)},
      {"bsc", make_bsc_pair(0.2)},
      {"bec", make_bec_pair(0.25)},
      {"uniform", make_uniform_pair()},
      {"exponential", make_exponential_pair()},
      {"exp_mean", make_exp_mean_pair(1.0, 1.0)},
      {"dmc", make_dmc_pair(discrete_dist({0.0, 1.0, 2.0}, {0.5, 0.3, 0.2}),
                            dmc_channel({{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.1, 0.2, 0.7}},
                                        "dmc33"))}};
  double crit = ks_critical(samples, 0.01);
  for (size_t z = 0; z < zoo.size(); ++z) {
    const auto& pair = *zoo[z].second;
    auto kernel = make_kernel(zoo[z].second);
    RngStream rng(2024, z);
    std::vector<double> pushed;
    pushed.reserve(samples);
    for (int i = 0; i < samples; ++i) {
      // one joint channel step: theta -> x -> y -> phi, then the kernel
      double th = draw_double(rng);
      double x = pair.input->inv_cdf(th);
      double y;
      if (pair.is_dmc()) {
        const auto& row = pair.channel->matrix()[static_cast<size_t>(x)];
        double u = draw_double(rng), acc = 0.0;
        size_t yi = 0;
        while (yi + 1 < row.size() && (acc += row[yi]) < u) ++yi;
        y = static_cast<double>(yi);
      } else if (pair.channel->noise()) {
        y = x + pair.channel->noise()->inv_cdf(draw_double(rng));
      } else {
        y = pair.channel->conditional(x)->inv_cdf(draw_double(rng));
      }
      UnitValue phi = normalize_output(pair, y, uv(draw_double(rng), 64));
      pushed.push_back(kernel->forward_norm(uv(th, 64), phi).to_double());
    }
    double ks = ks_statistic(pushed, [](double x) { return x; });
    c.require(ks < crit, zoo[z].first + ": KS " + num(ks) + " >= " + num(crit));
  }

  // mean-constrained pair: the input chain respects the mean constraint
  auto em = make_exp_mean_pair(1.0, 1.0);
  auto kernel = make_kernel(em);
  RngStream rng(77, 0);
  UnitValue th = uv(draw_double(rng), 64);
  double mean = 0.0;
  for (int i = 0; i < samples; ++i) {
    double x = em->input->inv_cdf(th.to_double());
    mean += x;
    double y = em->channel->noise() ? x + em->channel->noise()->inv_cdf(draw_double(rng))
                                    : em->channel->conditional(x)->inv_cdf(draw_double(rng));
    UnitValue phi = normalize_output(*em, y, uv(draw_double(rng), 64));
    th = kernel->forward_norm(th, phi);
  }
  mean /= samples;
  c.require(mean <= 1.05, "empirical input mean " + num(mean) + " above 1.05 a");
  return c;
}

// ---------------------------------------------------------------------------
// 8. decoder equivalence over enumerated output sequences

Transcript synthetic_binary(PairPtr pair, const KernelPtr& kernel, std::uint64_t bits, int n) {
  const long prec = 128;
  Transcript t;
  t.pair = pair;
  t.kernel = kernel;
  t.n = n;
  t.precision = prec;
  t.theta0 = UnitValue(0.5, prec);
  UnitValue th = t.theta0;
  t.thetas.push_back(th);
  for (int k = 0; k < n; ++k) {
    double ph = (bits >> k) & 1 ? 0.75 : 0.25;
    UnitValue phi(ph, prec);
    t.xs.push_back(pair->input->inv_cdf_r(th.r()));
    t.ys.push_back(Real(static_cast<double>(kernel->branch_of(phi)), prec));
    t.phis.push_back(phi);
    t.lams.push_back(UnitValue(0.5, prec));
    th = UnitValue(kernel->forward_norm(th, phi).r().round_to(prec));
    t.thetas.push_back(th);
  }
  return t;
}

Criterion criterion_decoder_equivalence() {
  Criterion c;
  auto bsc = make_bsc_pair(0.2);
  auto kernel = make_kernel(bsc);
  const double delta = 1e-3, alpha = 0.5;
  auto check_one = [&](int n, std::uint64_t bits) {
    auto t = synthetic_binary(bsc, kernel, bits, n);
    double tol = std::ldexp(1.0, -(static_cast<int>(t.precision) - 16));
    auto roll = decode_rollback(t, delta, alpha);
    Real mass = posterior_cdf(t, roll.hi, n + 1).r() - posterior_cdf(t, roll.lo, n + 1).r();
    Real want = Real(1.0, t.precision) - Real(delta, t.precision);
    c.require(abs(mass - want).to_double() <= tol,
              "n=" + std::to_string(n) + " bits=" + std::to_string(bits) + ": rollback mass off");
    auto var = decode_variable_rate(t, delta, 32);
    c.require((var.hi.r() - var.lo.r()) <= (roll.hi.r() - roll.lo.r()) + Real(tol, 64),
              "n=" + std::to_string(n) + " bits=" + std::to_string(bits) +
                  ": variable interval longer than rollback");
  };
  for (int n = 1; n <= 12 && c.ok; ++n)
    for (std::uint64_t bits = 0; bits < (1ull << n) && c.ok; ++bits) check_one(n, bits);
  for (int n = 13; n <= 20 && c.ok; ++n) {
    RngStream rng(900 + n, 0);
    for (int i = 0; i < 1250 && c.ok; ++i)
      check_one(n, draw_u64(rng) & ((1ull << n) - 1));
  }
  return c;
}

// ---------------------------------------------------------------------------
// 9. mismatch over heavier-tailed noise of equal variance

Criterion criterion_mismatch() {
  Criterion c;
  auto awgn = make_awgn_pair(3.0, 1.0);
  auto laplace = additive_channel(laplace_dist(0.0, std::sqrt(0.5)), "laplace_add");

  // the bound depends on the induced input only through its power, so a
  // matched-power Gaussian surrogate gives the exact value
  auto induced = make_generic_pair(gaussian_dist(0.0, 3.0), laplace);
  auto bound = mismatch_rate_bound(*awgn, *induced);
  c.require(std::abs(bound.bound_bits - 1.0) <= 0.01,
            "rate bound " + num(bound.bound_bits) + " not within 0.01 of 1.0");
  c.require(bound.penalty_bits >= -1e-6, "penalty negative: " + num(bound.penalty_bits));

  auto setup = make_mismatch_setup(awgn, laplace);
  auto xs = induced_input_chain(setup, 2000, 100000, 21);
  double m2 = 0.0;
  for (double x : xs) m2 += x * x;
  double snr_star = m2 / xs.size();  // unit true noise variance
  c.require(std::abs(snr_star - 3.0) <= 0.1, "induced SNR " + num(snr_star));

  double emp = empirical_mismatch_exponent(setup, 5000, 1, 779);
  c.require(std::abs(emp - 1.0) <= 0.1, "empirical exponent " + num(emp));

  // penalty nonnegativity across evaluated setups
  auto bsc2 = make_bsc_pair(0.2);
  auto bsc3 = make_bsc_pair(0.3);
  MismatchBound all[] = {bound, mismatch_rate_bound(*awgn, *awgn),
                         mismatch_rate_bound(*awgn, *make_awgn_pair(6.0, 2.0)),
                         mismatch_rate_bound(*bsc2, *bsc3),
                         mismatch_rate_bound(*bsc2, *bsc2)};
  for (const auto& b : all)
    c.require(b.penalty_bits >= -1e-6, "penalty negative: " + num(b.penalty_bits));
  return c;
}

// ---------------------------------------------------------------------------
// 10. fixed points and dominance ordering

Criterion criterion_fixed_points() {
  Criterion c;
  auto sym = make_dmc_pair(
      discrete_dist({0.0, 1.0, 2.0, 3.0}, {0.25, 0.25, 0.25, 0.25}),
      dmc_channel({{0.8, 0.2}, {0.4, 0.6}, {0.4, 0.6}, {0.8, 0.2}}, "symmetric4"));
  auto srep = fixed_point_scan(MatchingKernel(sym), 999, 1e-9);
  bool has_half = false;
  for (double t : srep.fixed_points)
    if (std::abs(t - 0.5) < 1e-9) has_half = true;
  c.require(has_half, "symmetric pair: theta = 1/2 not flagged");

  for (const auto& p : {make_bsc_pair(0.2), make_uniform_pair(), make_awgn_pair(3.0, 1.0)})
    c.require(fixed_point_scan(MatchingKernel(p), 999, 1e-9).fixed_point_free(),
              p->label + ": spurious fixed point");

  std::mt19937_64 gen(424242);
  std::uniform_int_distribution<int> size_d(2, 8);
  std::exponential_distribution<double> mass_d(1.0);
  for (int it = 0; it < 10000; ++it) {
    int k = size_d(gen);
    std::vector<double> p(k), q(k);
    double sp = 0, sq = 0;
    for (int i = 0; i < k; ++i) {
      p[i] = mass_d(gen);
      q[i] = mass_d(gen);
      sp += p[i];
      sq += q[i];
    }
    for (int i = 0; i < k; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    auto sigma = dominance_permutation(p, q);
    double partial = 0.0;
    for (int i = 0; i + 1 < k; ++i) {
      partial += p[sigma[i]] - q[sigma[i]];
      c.require(partial > 0.0, "iteration " + std::to_string(it) +
                                   ": cumulative dominance violated at prefix " +
                                   std::to_string(i + 1));
    }
    if (!c.ok) break;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* name;
    Criterion (*fn)();
  };
  const Entry entries[] = {
      {1, "kernel closed forms", criterion_kernels},
      {2, "posterior exponent", criterion_exponent},
      {3, "zero-error decoding", criterion_zero_error},
      {4, "binary variable-rate trend", criterion_bsc_trend},
      {5, "gaussian error decay", criterion_gaussian_decay},
      {6, "contraction thresholds", criterion_thresholds},
      {7, "uniformity preservation", criterion_preservation},
      {8, "decoder equivalence", criterion_decoder_equivalence},
      {9, "mismatch rate bound", criterion_mismatch},
      {10, "fixed points and dominance", criterion_fixed_points},
  };
  int rc = 0;
  for (const auto& e : entries) {
    if (argc > 1) {  // optional id filter for running a subset
      bool wanted = false;
      for (int i = 1; i < argc; ++i)
        if (std::stoi(argv[i]) == e.id) wanted = true;
      if (!wanted) continue;
    }
    Criterion c;
    try {
      c = e.fn();
    } catch (const std::exception& ex) {
      c.ok = false;
      c.why = std::string("exception: ") + ex.what();
    }
    if (c.ok)
      std::printf("criterion %d (%s): pass\n", e.id, e.name);
    else
      std::printf("criterion %d (%s): fail [%s]\n", e.id, e.name, c.why.c_str());
    std::fflush(stdout);
    if (!c.ok) rc = 1;
  }
  return rc;
}
