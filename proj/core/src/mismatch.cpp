#include "pm/mismatch.hpp"

#include <algorithm>
#include <cmath>

#include "pm/distribution.hpp"
#include "pm/error.hpp"
#include "pm/kernel.hpp"
#include "pm/quadrature.hpp"
#include "pm/rng.hpp"
#include "pm/stats.hpp"
#include "session_impl.hpp"

namespace pm {
namespace {

constexpr double kLog2e = 1.4426950408889634;

std::vector<double> pmf_from_cum(const std::vector<double>& cum) {
  std::vector<double> p(cum.size() - 1);
  for (size_t i = 0; i + 1 < cum.size(); ++i) p[i] = cum[i + 1] - cum[i];
  return p;
}

double discrete_kl(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) fail(errc::config_error, "kl: pmf sizes differ");
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    if (q[i] <= 0) fail(errc::infinite_penalty, "kl: support of p exceeds support of q");
    acc += p[i] * std::log2(p[i] / q[i]);
  }
  return acc;
}

}  // namespace

MismatchSetup make_mismatch_setup(PairPtr design, ChannelPtr true_channel, DistPtr induced_input) {
  if (!design || !true_channel) fail(errc::config_error, "mismatch setup: null component");
  if (design->is_dmc() != true_channel->is_dmc())
    fail(errc::config_error, "mismatch setup: channel mechanics differ (discrete vs continuous)");
  if (design->is_dmc()) {
    size_t in_n = design->in_cum.size() - 1;
    const auto& m = true_channel->matrix();
    if (m.size() < in_n) fail(errc::config_error, "mismatch setup: true channel input alphabet too small");
    for (const auto& row : m)
      if (row.size() != design->out_pmf.size())
        fail(errc::config_error, "mismatch setup: output alphabet mismatch");
  } else {
    DistPtr noise = true_channel->noise();
    for (int i = 0; i < 8; ++i) {
      double x = design->input->inv_cdf((i + 0.5) / 8.0);
      auto cond = noise ? nullptr : true_channel->conditional(x);
      for (int j = 0; j < 8; ++j) {
        double u = (j + 0.5) / 8.0;
        double y = noise ? x + noise->inv_cdf(u) : cond->inv_cdf(u);
        if (!design->output->in_support(y))
          fail(errc::out_of_support, "mismatch setup: true-channel output y=" + std::to_string(y) +
                                         " outside the design output support");
      }
    }
  }
  return MismatchSetup{std::move(design), std::move(true_channel), std::move(induced_input)};
}

Transcript run_mismatch(const MismatchSetup& setup, const std::optional<UnitValue>& theta0, int n,
                        std::uint64_t seed, std::uint64_t stream_id, const SessionOptions& opt) {
  if (!setup.design || !setup.true_channel) fail(errc::config_error, "mismatch setup: null component");
  return detail::run_session_over(setup.design, std::nullopt, theta0, n, seed, stream_id, opt,
                                  setup.true_channel.get());
}

double kl_divergence(const ScalarDistribution& p, const ScalarDistribution& q, double tol) {
  using Kind = ScalarDistribution::Kind;
  if (p.kind() == Kind::discrete && q.kind() == Kind::discrete) {
    double acc = 0.0;
    for (const auto& at : p.atoms()) {
      if (at.mass <= 0) continue;
      double qm = q.atom_mass(at.x);
      if (qm <= 0) fail(errc::infinite_penalty, "kl: support of p exceeds support of q");
      acc += at.mass * std::log2(at.mass / qm);
    }
    return acc;
  }
  if (p.kind() != Kind::continuous || q.kind() != Kind::continuous)
    fail(errc::config_error, "kl: mixed-kind divergence not supported");
  auto sup = p.support();
  auto f = [&](double x) {
    double fp = p.density(x);
    if (fp <= 0) return 0.0;
    double fq = q.density(x);
    if (fq <= 0) {
      // fq may have underflowed in a far tail; the contribution is bounded by
      // fp * log2(fp / DBL_MIN_DENORM). Only a non-negligible bound means the
      // support of p genuinely exceeds the support of q.
      double bound = fp * (std::log2(fp) + 1074.0);
      if (std::abs(bound) < 1e-12) return 0.0;
      fail(errc::infinite_penalty, "kl: support of p exceeds support of q");
    }
    return fp * std::log2(fp / fq);
  };
  double v = integrate_adaptive(f, sup.lo, sup.hi, tol, tol).value;
  if (!std::isfinite(v)) fail(errc::infinite_penalty, "kl: divergence integral infinite");
  return v;
}

double divergence_vs_gaussian(const ScalarDistribution& u, double gaussian_variance) {
  if (gaussian_variance <= 0) fail(errc::config_error, "divergence_vs_gaussian: variance <= 0");
  double hv = 0.5 * std::log2(2.0 * M_PI * M_E * gaussian_variance);
  double hu = entropy_bits(u, 1e-10);
  auto sup = u.support();
  double m2 = 0.0;
  for (const auto& at : u.atoms()) m2 += at.mass * at.x * at.x;
  if (u.kind() != ScalarDistribution::Kind::discrete)
    m2 += integrate_adaptive(
              [&](double x) {
                double f = u.density(x);
                return f > 0 ? x * x * f : 0.0;
              },
              sup.lo, sup.hi, 1e-10, 1e-10)
              .value;
  return hv - hu + 0.5 * kLog2e * (m2 / gaussian_variance - 1.0);
}

MismatchBound mismatch_rate_bound(const InputChannelPair& design, const InputChannelPair& induced,
                                  double tol) {
  if (design.is_dmc() != induced.is_dmc())
    fail(errc::config_error, "mismatch bound: channel mechanics differ");
  MismatchBound b;
  b.mi_star_bits = induced.mi_bits;
  if (design.is_dmc()) {
    const auto& wd = design.channel->matrix();
    const auto& wt = induced.channel->matrix();
    auto px = pmf_from_cum(induced.in_cum);
    if (wt.size() != px.size() || wd.size() < px.size())
      fail(errc::config_error, "mismatch bound: alphabet mismatch");
    double acc = 0.0;
    for (size_t x = 0; x < px.size(); ++x)
      if (px[x] > 0) acc += px[x] * discrete_kl(wt[x], wd[x]);
    b.d_conditional_bits = acc;
    b.d_output_bits = discrete_kl(induced.out_pmf, design.out_pmf);
  } else {
    DistPtr zd = design.channel->noise();
    DistPtr zt = induced.channel->noise();
    if (zd && zt) {
      b.d_conditional_bits = kl_divergence(*zt, *zd, 1e-9);
    } else {
      double acc = 0.0;
      for (auto& [u, w] : gauss_legendre(64, 0.0, 1.0)) {
        double x = induced.input->inv_cdf(u);
        acc += w * kl_divergence(*induced.channel->conditional(x), *design.channel->conditional(x),
                                 1e-7);
      }
      b.d_conditional_bits = acc;
    }
    b.d_output_bits = kl_divergence(*induced.output, *design.output, 1e-8);
  }
  b.penalty_bits = b.d_conditional_bits - b.d_output_bits;
  if (b.penalty_bits < -tol)
    fail(errc::integration_failed,
         "mismatch penalty " + std::to_string(b.penalty_bits) + " below -tol");
  b.bound_bits = b.mi_star_bits - b.penalty_bits;
  return b;
}

double empirical_mismatch_exponent(const MismatchSetup& setup, int n, int trials,
                                   std::uint64_t seed) {
  if (trials < 1) fail(errc::config_error, "mismatch exponent: trials must be >= 1");
  double acc = 0.0;
  for (int i = 0; i < trials; ++i) {
    auto t = run_mismatch(setup, std::nullopt, n, seed, static_cast<std::uint64_t>(i));
    acc += posterior_log_density_at_message(t);
  }
  return acc / trials;
}

std::vector<double> induced_input_chain(const MismatchSetup& setup, int burn, int keep,
                                        std::uint64_t seed, int thin) {
  const auto& pair = *setup.design;
  if (pair.is_dmc()) fail(errc::config_error, "induced chain: continuous designs only");
  if (burn < 0 || keep < 1 || thin < 1) fail(errc::config_error, "induced chain: bad sizes");
  RngStream rng(seed, 0);
  DistPtr noise = setup.true_channel->noise();
  double x = sample(*pair.input, rng);
  auto step = [&](double v) {
    double y = noise ? v + sample(*noise, rng) : sample(*setup.true_channel->conditional(v), rng);
    if (!pair.output->in_support(y))
      fail(errc::out_of_support, "induced chain: output outside design support");
    return kernel_eval(pair, v, y);
  };
  for (int k = 0; k < burn; ++k) x = step(x);
  std::vector<double> out;
  out.reserve(keep);
  for (int k = 0; k < keep; ++k) {
    for (int j = 0; j < thin; ++j) x = step(x);
    out.push_back(x);
  }
  return out;
}

double induced_input_stability(const MismatchSetup& setup, int burn, int keep, std::uint64_t seed,
                               int thin) {
  auto a = induced_input_chain(setup, burn, keep, seed, thin);
  auto b = induced_input_chain(setup, burn, keep, seed + 1, thin);
  return ks_two_sample(a, b);
}

}  // namespace pm
