#include "pm/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pm/error.hpp"

namespace pm {

namespace {
const double kInf = std::numeric_limits<double>::infinity();

Real mpfr_pi(long prec) {
  Real r(prec);
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}
}  // namespace

const std::vector<Atom>& ScalarDistribution::atoms() const {
  static const std::vector<Atom> none;
  return none;
}

double ScalarDistribution::atom_mass(double x) const {
  for (const auto& a : atoms())
    if (a.x == x) return a.mass;
  return 0.0;
}

double ScalarDistribution::mean() const {
  throw std::logic_error("mean() not available for " + label());
}

double ScalarDistribution::entropy_hint_bits() const { return std::numeric_limits<double>::quiet_NaN(); }

bool ScalarDistribution::in_support(double x) const {
  if (kind() == Kind::discrete) {
    for (const auto& a : atoms())
      if (a.x == x) return true;
    return false;
  }
  auto s = support();
  if (x >= s.lo && x <= s.hi) return true;
  for (const auto& a : atoms())
    if (a.x == x) return true;
  return false;
}

double ScalarDistribution::inv_cdf(double t) const {
  auto s = support();
  double lo = s.lo, hi = s.hi;
  if (!std::isfinite(lo)) {
    lo = -1.0;
    while (cdf(lo) > t && lo > -1e300) lo *= 2;
  }
  if (!std::isfinite(hi)) {
    hi = 1.0;
    while (cdf(hi) <= t && hi < 1e300) hi *= 2;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
    double m = 0.5 * (lo + hi);
    if (cdf(m) > t)
      hi = m;
    else
      lo = m;
  }
  return hi;
}

Real ScalarDistribution::cdf_r(const Real& x) const {
  return Real(cdf(x.to_double()), x.prec());
}

Real ScalarDistribution::inv_cdf_r(const Real& t) const {
  long prec = t.prec();
  auto s = support();
  double lo_d = std::isfinite(s.lo) ? s.lo : -1e280;
  double hi_d = std::isfinite(s.hi) ? s.hi : 1e280;
  Real lo(lo_d, prec), hi(hi_d, prec);
  Real tol = Real(1.0, prec);
  mpfr_set_ui_2exp(tol.raw(), 1, -(prec - 8), MPFR_RNDN);
  for (long i = 0; i < prec + 16; ++i) {
    Real m = (lo + hi) * 0.5;
    if (cdf_r(m) > t)
      hi = m;
    else
      lo = m;
    Real w = hi - lo;
    if (w <= tol * max(abs(hi), Real(1.0, prec))) break;
  }
  return hi;
}

// ---------------------------------------------------------------------------

namespace {

class UniformDist final : public ScalarDistribution {
 public:
  UniformDist(double a, double b) : a_(a), b_(b) {}
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return "uniform(" + std::to_string(a_) + "," + std::to_string(b_) + ")"; }
  SupportInterval support() const override { return {a_, b_}; }
  double cdf(double x) const override {
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    return (x - a_) / (b_ - a_);
  }
  double inv_cdf(double t) const override { return a_ + t * (b_ - a_); }
  double density(double x) const override { return (x > a_ && x < b_) ? 1.0 / (b_ - a_) : 0.0; }
  double mean() const override { return 0.5 * (a_ + b_); }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    if (x <= a_) return Real(0.0, x.prec());
    if (x >= b_) return Real(1.0, x.prec());
    return (x - a_) / (b_ - a_);
  }
  Real inv_cdf_r(const Real& t) const override { return t * (b_ - a_) + a_; }

 private:
  double a_, b_;
};

class GaussianDist final : public ScalarDistribution {
 public:
  GaussianDist(double mean, double var) : mu_(mean), var_(var), sigma_(std::sqrt(var)) {}
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override {
    return "gaussian(" + std::to_string(mu_) + "," + std::to_string(sigma_ * sigma_) + ")";
  }
  SupportInterval support() const override { return {-kInf, kInf}; }
  double cdf(double x) const override { return std_normal_cdf((x - mu_) / sigma_); }
  double inv_cdf(double t) const override { return mu_ + sigma_ * std_normal_quantile(t); }
  double density(double x) const override {
    double z = (x - mu_) / sigma_;
    return std::exp(-0.5 * z * z) / (sigma_ * 2.5066282746310005024);
  }
  double mean() const override { return mu_; }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    // F(x) = erfc(-z/sqrt(2))/2; sigma at working precision, not its double rounding
    Real z = (x - mu_) / sqrt(Real(var_, x.prec()));
    Real arg = -z / sqrt(Real(2.0, x.prec()));
    return erfc(arg) * 0.5;
  }
  Real inv_cdf_r(const Real& t) const override {
    long prec = t.prec();
    double td = t.to_double();
    Real z(prec);
    if (td > 1e-280 && td < 1.0 - 1e-16) {
      z = Real(std_normal_quantile(td), prec);
    } else if (td >= 1.0 - 1e-16) {
      // 1-t may be zero in double; use mpfr tail asymptotic z ~ sqrt(-2 ln(1-t))
      Real u = 1.0 - t;
      z = sqrt(Real(-2.0, prec) * log(u));
    } else {
      z = -sqrt(Real(-2.0, prec) * log(t));
    }
    // Newton on F(z)-t with quadratic convergence from the ~1e-15 seed:
    // accuracy doubles per step, so ~52 * 2^iters bits after iters steps.
    Real sqrt2pi = sqrt(mpfr_pi(prec) * 2.0);
    long iters = 1;
    for (long p = 104; p < prec + 8; p *= 2) ++iters;
    for (long i = 0; i < iters; ++i) {
      Real F = erfc(-z / sqrt(Real(2.0, prec))) * 0.5;
      Real f = exp(-(z * z) * 0.5) / sqrt2pi;
      if (f.sign() == 0) break;
      z -= (F - t) / f;
    }
    return z * sqrt(Real(var_, prec)) + mu_;
  }

 private:
  double mu_, var_, sigma_;
};

class ExponentialDist final : public ScalarDistribution {
 public:
  explicit ExponentialDist(double rate) : rate_(rate) {}
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return "exponential(" + std::to_string(rate_) + ")"; }
  SupportInterval support() const override { return {0.0, kInf}; }
  double cdf(double x) const override { return x <= 0 ? 0.0 : -std::expm1(-rate_ * x); }
  double inv_cdf(double t) const override { return -std::log1p(-t) / rate_; }
  double density(double x) const override { return x < 0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
  double mean() const override { return 1.0 / rate_; }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    if (x <= 0.0) return Real(0.0, x.prec());
    return -expm1(x * (-rate_));
  }
  Real inv_cdf_r(const Real& t) const override { return -log1p(-t) / rate_; }

 private:
  double rate_;
};

class LaplaceDist final : public ScalarDistribution {
 public:
  LaplaceDist(double mean, double scale) : mu_(mean), b_(scale) {}
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return "laplace(" + std::to_string(mu_) + "," + std::to_string(b_) + ")"; }
  SupportInterval support() const override { return {-kInf, kInf}; }
  double cdf(double x) const override {
    double z = (x - mu_) / b_;
    return z < 0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
  }
  double inv_cdf(double t) const override {
    return t < 0.5 ? mu_ + b_ * std::log(2.0 * t) : mu_ - b_ * std::log(2.0 * (1.0 - t));
  }
  double density(double x) const override { return 0.5 / b_ * std::exp(-std::abs(x - mu_) / b_); }
  double mean() const override { return mu_; }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    Real z = (x - mu_) / b_;
    if (z < 0.0) return exp(z) * 0.5;
    return 1.0 - exp(-z) * 0.5;
  }
  Real inv_cdf_r(const Real& t) const override {
    if (t < 0.5) return log(t * 2.0) * b_ + mu_;
    return mu_ - b_ * log((1.0 - t) * 2.0);
  }

 private:
  double mu_, b_;
};

class CauchyDist final : public ScalarDistribution {
 public:
  CauchyDist(double loc, double scale) : l_(loc), s_(scale) {}
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return "cauchy(" + std::to_string(l_) + "," + std::to_string(s_) + ")"; }
  SupportInterval support() const override { return {-kInf, kInf}; }
  double cdf(double x) const override { return 0.5 + std::atan((x - l_) / s_) / M_PI; }
  double inv_cdf(double t) const override { return l_ + s_ * std::tan(M_PI * (t - 0.5)); }
  double density(double x) const override {
    double z = (x - l_) / s_;
    return 1.0 / (M_PI * s_ * (1.0 + z * z));
  }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    Real z = (x - l_) / s_;
    Real a(x.prec());
    mpfr_atan(a.raw(), z.raw(), MPFR_RNDN);
    return a / mpfr_pi(x.prec()) + 0.5;
  }
  Real inv_cdf_r(const Real& t) const override {
    Real arg = (t - 0.5) * mpfr_pi(t.prec());
    Real tn(t.prec());
    mpfr_tan(tn.raw(), arg.raw(), MPFR_RNDN);
    return tn * s_ + l_;
  }

 private:
  double l_, s_;
};

class DiscreteDist final : public ScalarDistribution {
 public:
  DiscreteDist(std::vector<double> values, std::vector<double> probs) {
    if (values.size() != probs.size() || values.empty())
      throw std::invalid_argument("discrete_dist: mismatched atoms");
    double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("discrete_dist: masses sum to " + std::to_string(total));
    for (size_t i = 0; i + 1 < values.size(); ++i)
      if (values[i] >= values[i + 1]) throw std::invalid_argument("discrete_dist: values must ascend");
    double c = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
      atoms_.push_back({values[i], probs[i]});
      c += probs[i];
      cum_.push_back(c);
    }
    cum_.back() = 1.0;
  }
  Kind kind() const override { return Kind::discrete; }
  std::string label() const override { return "discrete(" + std::to_string(atoms_.size()) + ")"; }
  SupportInterval support() const override { return {atoms_.front().x, atoms_.back().x}; }
  const std::vector<Atom>& atoms() const override { return atoms_; }
  double cdf(double x) const override {
    double c = 0.0;
    for (size_t i = 0; i < atoms_.size(); ++i)
      if (atoms_[i].x <= x) c = cum_[i];
    return c;
  }
  double inv_cdf(double t) const override {
    for (size_t i = 0; i < atoms_.size(); ++i)
      if (cum_[i] > t) return atoms_[i].x;
    return atoms_.back().x;
  }
  double density(double x) const override { return atom_mass(x); }
  double mean() const override {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.x * a.mass;
    return m;
  }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override { return Real(cdf(x.to_double()), x.prec()); }
  Real inv_cdf_r(const Real& t) const override {
    for (size_t i = 0; i < atoms_.size(); ++i)
      if (t < cum_[i]) return Real(atoms_[i].x, t.prec());
    return Real(atoms_.back().x, t.prec());
  }
  const std::vector<double>& cum() const { return cum_; }

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cum_;
};

class MixedExpDist final : public ScalarDistribution {
 public:
  MixedExpDist(double a, double b) : a_(a), b_(b), ab_(a + b) { atoms_.push_back({0.0, b_ / ab_}); }
  Kind kind() const override { return Kind::mixed; }
  std::string label() const override { return "mixed_exp(" + std::to_string(a_) + "," + std::to_string(b_) + ")"; }
  SupportInterval support() const override { return {0.0, kInf}; }
  const std::vector<Atom>& atoms() const override { return atoms_; }
  double cdf(double x) const override {
    if (x < 0) return 0.0;
    return 1.0 - a_ / ab_ * std::exp(-x / ab_);
  }
  double inv_cdf(double t) const override {
    if (t < b_ / ab_) return 0.0;
    return ab_ * std::log(a_ / (ab_ * (1.0 - t)));
  }
  double density(double x) const override {
    if (x == 0.0) return b_ / ab_;
    if (x < 0) return 0.0;
    return a_ / (ab_ * ab_) * std::exp(-x / ab_);
  }
  double mean() const override { return a_; }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    if (x < 0.0) return Real(0.0, x.prec());
    return 1.0 - exp(x / (-ab_)) * (a_ / ab_);
  }
  Real inv_cdf_r(const Real& t) const override {
    if (t < b_ / ab_) return Real(0.0, t.prec());
    return log((1.0 - t) * (ab_ / a_)) * (-ab_);
  }

 private:
  double a_, b_, ab_;
  std::vector<Atom> atoms_;
};

class TriangularConvDist final : public ScalarDistribution {
 public:
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return "triangular(0,2)"; }
  SupportInterval support() const override { return {0.0, 2.0}; }
  double cdf(double x) const override {
    if (x <= 0) return 0.0;
    if (x >= 2) return 1.0;
    if (x <= 1) return 0.5 * x * x;
    double u = 2.0 - x;
    return 1.0 - 0.5 * u * u;
  }
  double inv_cdf(double t) const override {
    if (t <= 0.5) return std::sqrt(2.0 * t);
    return 2.0 - std::sqrt(2.0 * (1.0 - t));
  }
  double density(double x) const override {
    if (x <= 0 || x >= 2) return 0.0;
    return x <= 1 ? x : 2.0 - x;
  }
  double mean() const override { return 1.0; }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    long prec = x.prec();
    if (x <= 0.0) return Real(0.0, prec);
    if (x >= 2.0) return Real(1.0, prec);
    if (x <= 1.0) return x * x * 0.5;
    Real u = 2.0 - x;
    return 1.0 - u * u * 0.5;
  }
  Real inv_cdf_r(const Real& t) const override {
    if (t <= 0.5) return sqrt(t * 2.0);
    return 2.0 - sqrt((1.0 - t) * 2.0);
  }
};

class Gamma2Dist final : public ScalarDistribution {
 public:
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return "gamma2"; }
  SupportInterval support() const override { return {0.0, kInf}; }
  double cdf(double x) const override {
    if (x <= 0) return 0.0;
    return 1.0 - (1.0 + x) * std::exp(-x);
  }
  double inv_cdf(double t) const override {
    if (t <= 0) return 0.0;
    double y = t < 0.3 ? std::sqrt(2.0 * t) : -std::log1p(-t) + std::log1p(-std::log1p(-t));
    y = std::max(y, 1e-12);
    for (int i = 0; i < 60; ++i) {
      double F = cdf(y), f = density(y);
      if (f <= 0) break;
      double step = (F - t) / f;
      y -= step;
      if (y <= 0) y = 1e-12;
      if (std::abs(step) < 1e-15 * std::max(1.0, y)) break;
    }
    return y;
  }
  double density(double x) const override { return x <= 0 ? 0.0 : x * std::exp(-x); }
  double mean() const override { return 2.0; }
  bool has_extended() const override { return true; }
  Real cdf_r(const Real& x) const override {
    if (x <= 0.0) return Real(0.0, x.prec());
    return 1.0 - (x + 1.0) * exp(-x);
  }
  Real inv_cdf_r(const Real& t) const override {
    long prec = t.prec();
    Real y(inv_cdf(t.to_double()), prec);
    long iters = 3;
    for (long p = 64; p < prec; p *= 2) ++iters;
    for (long i = 0; i < iters; ++i) {
      Real e = exp(-y);
      Real F = 1.0 - (y + 1.0) * e;
      Real f = y * e;
      if (f.sign() == 0) break;
      y -= (F - t) / f;
    }
    return y;
  }
};

class ShiftedDist final : public ScalarDistribution {
 public:
  ShiftedDist(DistPtr inner, double c) : inner_(std::move(inner)), c_(c) {
    for (const auto& a : inner_->atoms()) atoms_.push_back({a.x + c_, a.mass});
  }
  Kind kind() const override { return inner_->kind(); }
  std::string label() const override { return inner_->label() + "+" + std::to_string(c_); }
  SupportInterval support() const override {
    auto s = inner_->support();
    return {s.lo + c_, s.hi + c_};
  }
  const std::vector<Atom>& atoms() const override { return atoms_; }
  double cdf(double x) const override { return inner_->cdf(x - c_); }
  double inv_cdf(double t) const override { return inner_->inv_cdf(t) + c_; }
  double density(double x) const override { return inner_->density(x - c_); }
  double mean() const override { return inner_->mean() + c_; }
  bool has_extended() const override { return inner_->has_extended(); }
  Real cdf_r(const Real& x) const override { return inner_->cdf_r(x - c_); }
  Real inv_cdf_r(const Real& t) const override { return inner_->inv_cdf_r(t) + c_; }

 private:
  DistPtr inner_;
  double c_;
  std::vector<Atom> atoms_;
};

class NumericPdfDist final : public ScalarDistribution {
 public:
  NumericPdfDist(std::function<double(double)> pdf, SupportInterval sup, std::string label)
      : pdf_(std::move(pdf)), label_(std::move(label)) {
    double lo = sup.lo, hi = sup.hi;
    // Truncate infinite tails where the density is negligible.
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      double peak = 0.0;
      for (double x = -8; x <= 8; x += 0.25) peak = std::max(peak, pdf_(x));
      if (!std::isfinite(lo)) {
        lo = -8;
        while (pdf_(lo) > 1e-18 * peak && lo > -1e6) lo -= 4;
      }
      if (!std::isfinite(hi)) {
        hi = 8;
        while (pdf_(hi) > 1e-18 * peak && hi < 1e6) hi += 4;
      }
    }
    lo_ = lo;
    hi_ = hi;
    const int n = 8192;
    xs_.resize(n + 1);
    cum_.resize(n + 1);
    double h = (hi - lo) / n;
    cum_[0] = 0.0;
    xs_[0] = lo;
    for (int i = 1; i <= n; ++i) {
      xs_[i] = lo + i * h;
      double a = xs_[i - 1], b = xs_[i];
      // Simpson per cell
      cum_[i] = cum_[i - 1] + (pdf_(a) + 4.0 * pdf_(0.5 * (a + b)) + pdf_(b)) * (b - a) / 6.0;
    }
    norm_ = cum_.back();
    for (auto& c : cum_) c /= norm_;
    entropy_ = 0.0;
    for (size_t i = 1; i < cum_.size(); ++i) {
      double m = cum_[i] - cum_[i - 1];
      if (m > 0) entropy_ -= m * std::log2(m / h);
    }
  }
  Kind kind() const override { return Kind::continuous; }
  std::string label() const override { return label_; }
  SupportInterval support() const override { return {lo_, hi_}; }
  double cdf(double x) const override {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    size_t i = static_cast<size_t>((x - lo_) / (hi_ - lo_) * (xs_.size() - 1));
    i = std::min(i, xs_.size() - 2);
    double a = xs_[i], b = xs_[i + 1];
    double w = (x - a) / (b - a);
    return cum_[i] * (1 - w) + cum_[i + 1] * w;
  }
  double inv_cdf(double t) const override {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
    if (it == cum_.begin()) return lo_;
    if (it == cum_.end()) return hi_;
    size_t i = static_cast<size_t>(it - cum_.begin());
    double w = (t - cum_[i - 1]) / (cum_[i] - cum_[i - 1]);
    return xs_[i - 1] + w * (xs_[i] - xs_[i - 1]);
  }
  double density(double x) const override { return (x < lo_ || x > hi_) ? 0.0 : pdf_(x) / norm_; }
  double entropy_hint_bits() const override { return entropy_; }

 private:
  std::function<double(double)> pdf_;
  std::string label_;
  double lo_, hi_, norm_, entropy_;
  std::vector<double> xs_, cum_;
};

}  // namespace

DistPtr uniform_dist(double a, double b) { return std::make_shared<UniformDist>(a, b); }
DistPtr gaussian_dist(double mean, double variance) { return std::make_shared<GaussianDist>(mean, variance); }
DistPtr exponential_dist(double rate) { return std::make_shared<ExponentialDist>(rate); }
DistPtr laplace_dist(double mean, double scale) { return std::make_shared<LaplaceDist>(mean, scale); }
DistPtr cauchy_dist(double loc, double scale) { return std::make_shared<CauchyDist>(loc, scale); }
DistPtr discrete_dist(std::vector<double> values, std::vector<double> probs) {
  return std::make_shared<DiscreteDist>(std::move(values), std::move(probs));
}
DistPtr bernoulli_dist(double p1) { return discrete_dist({0.0, 1.0}, {1.0 - p1, p1}); }
DistPtr mixed_exponential_dist(double a, double b) { return std::make_shared<MixedExpDist>(a, b); }
DistPtr triangular_conv_dist() { return std::make_shared<TriangularConvDist>(); }
DistPtr gamma2_dist() { return std::make_shared<Gamma2Dist>(); }
DistPtr shifted_dist(DistPtr inner, double c) { return std::make_shared<ShiftedDist>(std::move(inner), c); }
DistPtr numeric_pdf_dist(std::function<double(double)> pdf, SupportInterval sup, std::string label) {
  return std::make_shared<NumericPdfDist>(std::move(pdf), sup, std::move(label));
}

double inverse_cdf_sample(const ScalarDistribution& d, const UnitValue& t) {
  return d.inv_cdf_r(t.r()).to_double();
}

Real inverse_cdf_sample_r(const ScalarDistribution& d, const Real& t) { return d.inv_cdf_r(t); }

UnitValue uniformize(const ScalarDistribution& d, const Real& x, const UnitValue& lam) {
  double xd = x.to_double();
  if (!d.in_support(xd)) fail(errc::out_of_support, "uniformize: x=" + std::to_string(xd) + " outside " + d.label());
  double mass = d.atom_mass(xd);
  Real F = d.cdf_r(x);
  if (mass == 0.0) return UnitValue(F);
  return UnitValue(F - lam.r() * mass);
}

double sample(const ScalarDistribution& d, RngStream& rng) { return d.inv_cdf(draw_double(rng)); }

Real sample_r(const ScalarDistribution& d, RngStream& rng, long prec) {
  return d.inv_cdf_r(draw_real(rng, prec));
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double std_normal_quantile(double t) {
  // Acklam's rational approximation + one Newton polish.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  double x;
  if (t < 0.02425) {
    double q = std::sqrt(-2.0 * std::log(t));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (t <= 0.97575) {
    double q = t - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - t));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = std_normal_cdf(x) - t;
  double pdf = std::exp(-0.5 * x * x) / 2.5066282746310005024;
  if (pdf > 0) x -= e / pdf;
  return x;
}

}  // namespace pm
