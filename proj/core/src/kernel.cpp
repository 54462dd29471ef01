#include "pm/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "pm/error.hpp"
#include "pm/quadrature.hpp"

namespace pm {
namespace {

long wprec(const UnitValue& a, const UnitValue& b) { return std::max(a.prec(), b.prec()); }

UnitValue clamp_unit(Real v) {
  if (v < 0.0) v = Real(0.0, v.prec());
  if (v > 1.0) v = Real(1.0, v.prec());
  return UnitValue(std::move(v));
}

const ScalarDistribution& std_normal() {
  static DistPtr d = gaussian_dist(0.0, 1.0);
  return *d;
}

// Inverse c.d.f. of the triangular output law of the uniform pair.
Real triangular_inv(const UnitValue& phi) {
  Real t = phi.r();
  if (t <= 0.5) return sqrt(t * 2.0);
  return 2.0 - sqrt((1.0 - t) * 2.0);
}

}  // namespace

MatchingKernel::MatchingKernel(PairPtr pair) : pair_(std::move(pair)) {
  if (pair_->is_dmc()) {
    post_cum_.resize(pair_->posterior.size());
    for (size_t y = 0; y < pair_->posterior.size(); ++y) {
      post_cum_[y].assign(pair_->posterior[y].size() + 1, 0.0);
      for (size_t x = 0; x < pair_->posterior[y].size(); ++x)
        post_cum_[y][x + 1] = post_cum_[y][x] + pair_->posterior[y][x];
      post_cum_[y].back() = 1.0;
    }
  }
  closed_ = pair_->kind != PairKind::generic;
}

size_t MatchingKernel::branch_of(const UnitValue& phi) const {
  const auto& cum = pair_->out_cum;
  double p = phi.to_double();
  for (size_t y = 0; y + 1 < cum.size(); ++y)
    if (cum[y + 1] > p || (y + 2 == cum.size())) return y;
  return cum.size() - 2;
}

UnitValue MatchingKernel::forward_dmc(const UnitValue& theta, const UnitValue& phi) const {
  long wp = wprec(theta, phi);
  size_t y = branch_of(phi);
  const auto& in_cum = pair_->in_cum;
  size_t x = 0;
  while (x + 2 < in_cum.size() && theta.r() >= in_cum[x + 1]) ++x;
  double px = in_cum[x + 1] - in_cum[x];
  if (px <= 0) return UnitValue(Real(post_cum_[y][x], wp));
  // slope posterior/px computed in extended precision so that the inverse
  // branch (which multiplies by px/posterior) round-trips to ~1 ulp
  Real v = (theta.r() - Real(in_cum[x], wp)) * Real(pair_->posterior[y][x], wp) / Real(px, wp) +
           Real(post_cum_[y][x], wp);
  return clamp_unit(std::move(v));
}

UnitValue MatchingKernel::inverse_dmc(const UnitValue& s, const UnitValue& phi) const {
  long wp = wprec(s, phi);
  size_t y = branch_of(phi);
  const auto& in_cum = pair_->in_cum;
  const auto& pc = post_cum_[y];
  // inf{theta : F(theta) > s}: skip zero-slope cells entirely.
  size_t x = 0;
  while (x + 2 < pc.size() && (s.r() >= pc[x + 1] || pair_->posterior[y][x] == 0.0)) ++x;
  double px = in_cum[x + 1] - in_cum[x];
  double slope = pair_->posterior[y][x];
  if (slope <= 0.0) return UnitValue(Real(in_cum[x + 1], wp));
  Real v = (s.r() - Real(pc[x], wp)) * Real(px, wp) / Real(slope, wp) + Real(in_cum[x], wp);
  // flat regions make F not strictly increasing; keep the result in-cell
  if (v < in_cum[x]) v = Real(in_cum[x], wp);
  if (v > in_cum[x + 1]) v = Real(in_cum[x + 1], wp);
  return clamp_unit(std::move(v));
}

UnitValue MatchingKernel::forward_norm(const UnitValue& theta, const UnitValue& phi) const {
  long wp = wprec(theta, phi);
  switch (pair_->kind) {
    case PairKind::awgn: {
      // guard bits absorb the cdf/inv_cdf condition number near the tails
      long wg = wp + 32;
      Real zx = std_normal().inv_cdf_r(theta.r().round_to(wg));
      Real zy = std_normal().inv_cdf_r(phi.r().round_to(wg));
      Real x = sqrt(Real(pair_->P, wg)) * zx;
      Real y = sqrt(Real(pair_->P + pair_->N, wg)) * zy;
      Real g = Real(pair_->snr, wg) / Real(1.0 + pair_->snr, wg);
      Real sp = sqrt(Real(pair_->P, wg) / Real(1.0 + pair_->snr, wg));
      // keep the guard bits: rounding to wp here would lose the resolution the
      // inverse branch needs where the map compresses toward 0/1
      return clamp_unit(std_normal().cdf_r((x - g * y) / sp));
    }
    case PairKind::uniform_add: {
      Real y = triangular_inv(phi).round_to(wp);
      if (y <= 1.0) return clamp_unit(theta.r().round_to(wp) / y);
      return clamp_unit((theta.r().round_to(wp) - (y - 1.0)) / (2.0 - y));
    }
    case PairKind::exp_add: {
      Real y = pair_->output->inv_cdf_r(phi.r().round_to(wp));
      Real x = -log1p(-theta.r().round_to(wp));
      return clamp_unit(x / y);
    }
    case PairKind::exp_mean: {
      Real ra(pair_->a, wp), rb(pair_->b, wp);
      Real rab = ra + rb;
      Real th = theta.r().round_to(wp), ph = phi.r().round_to(wp);
      Real omphi = 1.0 - ph;
      if (th * rab <= rb) return clamp_unit(th * pow(omphi, ra / rb) * (rab / rb));
      Real ratio = omphi * (ra / rab) / (1.0 - th);
      if (ratio >= 1.0)
        fail(errc::out_of_support,
             "normalized kernel: theta outside a.s. support given phi (theta=" +
                 std::to_string(th.to_double()) + ", phi=" + std::to_string(ph.to_double()) + ")");
      return clamp_unit(pow(ratio, ra / rb));
    }
    case PairKind::bsc:
    case PairKind::bec:
    case PairKind::dmc:
      return forward_dmc(theta, phi);
    case PairKind::generic:
      break;
  }
  // Numeric conjugation through F_X, F_Y (double accuracy, proper input only).
  if (!pair_->input->atoms().empty())
    fail(errc::config_error, "numeric kernel requires an atom-free input law");
  double y = pair_->output->inv_cdf(phi.to_double());
  double x = pair_->input->inv_cdf(theta.to_double());
  auto xs = pair_->input->support();
  auto f = [&](double u) {
    double fx = pair_->input->density(u);
    return fx > 0 ? fx * pair_->channel->conditional(u)->density(y) : 0.0;
  };
  double full = integrate(f, xs.lo, xs.hi, 1e-11);
  if (full <= 0) fail(errc::unsupported_output, "zero output density at y=" + std::to_string(y));
  double numer = x <= xs.lo ? 0.0 : integrate(f, xs.lo, std::min(x, xs.hi), 1e-11);
  return UnitValue(std::clamp(numer / full, 0.0, 1.0), wp);
}

UnitValue MatchingKernel::inverse_norm(const UnitValue& s, const UnitValue& phi) const {
  long wp = wprec(s, phi);
  switch (pair_->kind) {
    case PairKind::awgn: {
      long wg = wp + 32;
      Real zs = std_normal().inv_cdf_r(s.r().round_to(wg));
      Real zy = std_normal().inv_cdf_r(phi.r().round_to(wg));
      Real y = sqrt(Real(pair_->P + pair_->N, wg)) * zy;
      Real g = Real(pair_->snr, wg) / Real(1.0 + pair_->snr, wg);
      Real sp = sqrt(Real(pair_->P, wg) / Real(1.0 + pair_->snr, wg));
      Real x = fma(sp, zs, g * y);
      return clamp_unit(std_normal().cdf_r(x / sqrt(Real(pair_->P, wg))).round_to(wp + 32));
    }
    case PairKind::uniform_add: {
      Real y = triangular_inv(phi).round_to(wp);
      if (y <= 1.0) return clamp_unit(s.r().round_to(wp) * y);
      return clamp_unit(fma(s.r().round_to(wp), 2.0 - y, y - 1.0));
    }
    case PairKind::exp_add: {
      Real y = pair_->output->inv_cdf_r(phi.r().round_to(wp));
      return clamp_unit(-expm1(-(s.r().round_to(wp) * y)));
    }
    case PairKind::exp_mean: {
      Real ra(pair_->a, wp), rb(pair_->b, wp);
      Real rab = ra + rb;
      Real sv = s.r().round_to(wp), ph = phi.r().round_to(wp);
      Real boundary = pow(1.0 - ph, ra / rb);
      if (sv <= boundary) return clamp_unit(sv * pow(1.0 - ph, -(ra / rb)) * (rb / rab));
      return clamp_unit(1.0 - (1.0 - ph) * (ra / rab) * pow(sv, -(rb / ra)));
    }
    case PairKind::bsc:
    case PairKind::bec:
    case PairKind::dmc:
      return inverse_dmc(s, phi);
    case PairKind::generic:
      break;
  }
  // Bisection on the numeric forward map.
  double target = s.to_double();
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (forward_norm(UnitValue(mid, 64), phi).to_double() > target)
      hi = mid;
    else
      lo = mid;
  }
  return UnitValue(0.5 * (lo + hi), wp);
}

double MatchingKernel::forward_xy(double x, double y) const {
  switch (pair_->kind) {
    case PairKind::awgn: {
      double g = pair_->snr / (1.0 + pair_->snr);
      return std::sqrt(1.0 + pair_->snr) * (x - g * y);
    }
    case PairKind::uniform_add: {
      if (y <= 0 || y >= 2 || x <= std::max(0.0, y - 1.0) - 1e-15 || x >= std::min(1.0, y) + 1e-15)
        fail(errc::out_of_support, "uniform kernel (x,y) outside joint support");
      if (y <= 1.0) return x / y;
      return (x - y + 1.0) / (2.0 - y);
    }
    case PairKind::exp_add: {
      if (y <= 0 || x < 0 || x >= y) fail(errc::out_of_support, "exponential kernel needs 0 <= x < y");
      return std::log(y / (y - x));
    }
    default:
      break;
  }
  auto post = inverse_channel(*pair_, y);
  if (!pair_->input->in_support(x)) fail(errc::out_of_support, "x outside input support");
  return pair_->input->inv_cdf(std::min(post->cdf(x), 1.0 - 1e-16));
}

KernelPtr make_kernel(PairPtr pair) { return std::make_shared<MatchingKernel>(std::move(pair)); }

double kernel_eval(const InputChannelPair& pair, double x, double y) {
  MatchingKernel k(std::make_shared<InputChannelPair>(pair));
  return k.forward_xy(x, y);
}

UnitValue normalized_kernel_eval(const InputChannelPair& pair, const UnitValue& theta, const UnitValue& phi) {
  MatchingKernel k(std::make_shared<InputChannelPair>(pair));
  return k.forward_norm(theta, phi);
}

UnitValue normalize_output(const InputChannelPair& pair, double y, const UnitValue& lam) {
  return UnitValue(normalize_output_r(pair, Real(y, lam.prec()), lam));
}

Real normalize_output_r(const InputChannelPair& pair, const Real& y, const UnitValue& lam) {
  if (pair.is_dmc()) {
    double yd = y.to_double();
    auto yi = static_cast<size_t>(yd);
    if (static_cast<double>(yi) != yd || yi >= pair.out_pmf.size())
      fail(errc::out_of_support, "normalize_output: y=" + std::to_string(yd));
    long wp = std::max(y.prec(), lam.prec());
    return fma(-lam.r().round_to(wp), Real(pair.out_pmf[yi], wp), Real(pair.out_cum[yi + 1], wp));
  }
  const auto& out = *pair.output;
  if (!out.in_support(y.to_double())) fail(errc::out_of_support, "normalize_output: y outside support");
  double am = out.atom_mass(y.to_double());
  Real f = out.cdf_r(y);
  if (am > 0) f -= lam.r().round_to(y.prec()) * am;
  return f;
}

Upf::Upf(std::string label, std::vector<double> breaks, std::vector<size_t> perm)
    : label_(std::move(label)), breaks_(std::move(breaks)), perm_(std::move(perm)) {
  size_t m = perm_.size();
  if (breaks_.size() != m + 1 || breaks_.front() != 0.0 || breaks_.back() != 1.0)
    fail(errc::config_error, "Upf: breaks must run 0..1 with one cell per perm entry");
  for (size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (breaks_[i] >= breaks_[i + 1]) fail(errc::config_error, "Upf: breaks must be increasing");
  std::vector<bool> seen(m, false);
  for (size_t i : perm_) {
    if (i >= m || seen[i]) fail(errc::config_error, "Upf: perm is not a permutation");
    seen[i] = true;
  }
  dstart_.assign(m, 0.0);
  dbreaks_.assign(m + 1, 0.0);
  double acc = 0.0;
  for (size_t j = 0; j < m; ++j) {
    size_t i = perm_[j];
    dstart_[i] = acc;
    acc += breaks_[i + 1] - breaks_[i];
    dbreaks_[j + 1] = acc;
  }
  dbreaks_[m] = 1.0;
}

bool Upf::is_identity() const {
  for (size_t j = 0; j < perm_.size(); ++j)
    if (perm_[j] != j) return false;
  return true;
}

UnitValue Upf::map(const UnitValue& t) const {
  // cells are half-open on the left: cell i covers (b_i, b_{i+1}]
  size_t i = 0;
  while (i + 1 < perm_.size() && t.r() > breaks_[i + 1]) ++i;
  return clamp_unit(t.r() - Real(breaks_[i], t.prec()) + Real(dstart_[i], t.prec()));
}

UnitValue Upf::inv(const UnitValue& t) const {
  size_t j = 0;
  while (j + 1 < perm_.size() && t.r() > dbreaks_[j + 1]) ++j;
  return clamp_unit(t.r() - Real(dbreaks_[j], t.prec()) + Real(breaks_[perm_[j]], t.prec()));
}

std::vector<std::pair<double, double>> Upf::image_of_prefix(double v) const {
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i < perm_.size() && breaks_[i] < v; ++i) {
    double hi = std::min(v, breaks_[i + 1]);
    out.emplace_back(dstart_[i], dstart_[i] + (hi - breaks_[i]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<Real, Real>> Upf::image_of_prefix_r(const Real& v) const {
  std::vector<std::pair<Real, Real>> out;
  long wp = v.prec();
  for (size_t i = 0; i < perm_.size() && v > breaks_[i]; ++i) {
    Real hi = min(v, Real(breaks_[i + 1], wp));
    out.emplace_back(Real(dstart_[i], wp), Real(dstart_[i], wp) + (hi - breaks_[i]));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

UnitValue mu_inner_cdf(const MatchingKernel& kernel, const Upf& mu, const UnitValue& v,
                       const UnitValue& phi) {
  if (mu.is_identity()) return kernel.forward_norm(v, phi);
  // F_{mu^{-1}(Theta)|Phi}(v|phi) = P(Theta in mu((0,v]) | phi), assembled
  // from the baseline kernel over the image intervals.
  long wp = std::max(v.prec(), phi.prec());
  Real acc(0.0, wp);
  for (auto& [a, b] : mu.image_of_prefix_r(v.r().round_to(wp))) {
    if (b <= a) continue;
    Real hi = b >= 1.0 ? Real(1.0, wp) : kernel.forward_norm(UnitValue(b), phi).r();
    Real lo = a > 0.0 ? kernel.forward_norm(UnitValue(a), phi).r() : Real(0.0, wp);
    acc += hi - lo;
  }
  return clamp_unit(std::move(acc));
}

UnitValue mu_variant_kernel(const MatchingKernel& kernel, const Upf& mu, const UnitValue& theta,
                            const UnitValue& phi) {
  UnitValue v = mu.inv(theta);
  if (mu.is_identity()) return kernel.forward_norm(v, phi);
  return mu.map(mu_inner_cdf(kernel, mu, v, phi));
}

Upf identity_upf() { return Upf("identity", {0.0, 1.0}, {0}); }

Upf three_piece_shift_upf() {
  // self-inverse shuffle of the thirds: (0,1/3] <-> (1/3,2/3], top third fixed
  return Upf("three_piece_shift", {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {1, 0, 2});
}

Upf permutation_upf(std::vector<double> breaks, std::vector<size_t> perm) {
  return Upf("permutation", std::move(breaks), std::move(perm));
}

Upf input_permutation_upf(const InputChannelPair& pair, std::vector<size_t> perm) {
  if (!pair.is_dmc()) fail(errc::not_discrete, "input_permutation_upf needs a discrete input");
  return Upf("input_permutation", pair.in_cum, std::move(perm));
}

}  // namespace pm
