#include "pm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pm/error.hpp"
#include "pm/quadrature.hpp"

namespace pm {

const std::vector<std::vector<double>>& MemorylessChannel::matrix() const {
  fail(errc::not_discrete, "matrix() on non-DMC channel " + label());
}

namespace {

class DmcChannel final : public MemorylessChannel {
 public:
  DmcChannel(std::vector<std::vector<double>> m, std::string label) : m_(std::move(m)), label_(std::move(label)) {
    if (m_.empty()) fail(errc::config_error, "empty DMC matrix");
    size_t ny = m_[0].size();
    for (const auto& row : m_) {
      if (row.size() != ny) fail(errc::config_error, "ragged DMC matrix");
      double s = std::accumulate(row.begin(), row.end(), 0.0);
      if (std::abs(s - 1.0) > 1e-12) fail(errc::config_error, "DMC row sums to " + std::to_string(s));
    }
  }
  std::string label() const override { return label_; }
  bool is_dmc() const override { return true; }
  const std::vector<std::vector<double>>& matrix() const override { return m_; }
  DistPtr conditional(double x) const override {
    auto xi = static_cast<size_t>(x);
    if (xi >= m_.size() || static_cast<double>(xi) != x)
      fail(errc::out_of_support, "DMC input " + std::to_string(x));
    std::vector<double> ys(m_[xi].size());
    std::iota(ys.begin(), ys.end(), 0.0);
    return discrete_dist(ys, m_[xi]);
  }

 private:
  std::vector<std::vector<double>> m_;
  std::string label_;
};

class AdditiveChannel final : public MemorylessChannel {
 public:
  AdditiveChannel(DistPtr noise, std::string label) : noise_(std::move(noise)), label_(std::move(label)) {}
  std::string label() const override { return label_; }
  DistPtr conditional(double x) const override { return shifted_dist(noise_, x); }
  DistPtr noise() const override { return noise_; }

 private:
  DistPtr noise_;
  std::string label_;
};

// Posterior of the mean-constrained exponential pair: atom at 0 of mass
// e^{-cy} plus density (a/((a+b)b)) e^{c(x-y)} on (0,y), c = a/(b(a+b)).
class TiltedExpPosterior final : public ScalarDistribution {
 public:
  TiltedExpPosterior(double a, double b, double y) : a_(a), b_(b), y_(y), c_(a / (b * (a + b))) {
    atoms_.push_back({0.0, std::exp(-c_ * y_)});
  }
  Kind kind() const override { return Kind::mixed; }
  std::string label() const override { return "tilted_exp_posterior"; }
  SupportInterval support() const override { return {0.0, y_}; }
  const std::vector<Atom>& atoms() const override { return atoms_; }
  double cdf(double x) const override {
    if (x < 0) return 0.0;
    if (x >= y_) return 1.0;
    // e^{-cy} + int_0^x (a/((a+b)b)) e^{c(u-y)} du ; note a/((a+b)b) = c
    return std::exp(-c_ * y_) + (std::exp(c_ * (x - y_)) - std::exp(-c_ * y_));
  }
  double inv_cdf(double t) const override {
    double m = atoms_[0].mass;
    if (t < m) return 0.0;
    // solve e^{c(x-y)} = t
    return y_ + std::log(t) / c_;
  }
  double density(double x) const override {
    if (x == 0.0) return atoms_[0].mass;
    if (x < 0 || x >= y_) return 0.0;
    return c_ * std::exp(c_ * (x - y_));
  }
  double mean() const override {
    // int_0^y x c e^{c(x-y)} dx
    return y_ - (1.0 - std::exp(-c_ * y_)) / c_;
  }

 private:
  double a_, b_, y_, c_;
  std::vector<Atom> atoms_;
};

void fill_dmc_caches(InputChannelPair& pair) {
  const auto& m = pair.channel->matrix();
  size_t nx = m.size(), ny = m[0].size();
  std::vector<double> px(nx);
  for (const auto& at : pair.input->atoms()) {
    auto i = static_cast<size_t>(at.x);
    if (i >= nx || static_cast<double>(i) != at.x)
      fail(errc::config_error, "DMC input atom at " + std::to_string(at.x));
    px[i] = at.mass;
  }
  pair.out_pmf.assign(ny, 0.0);
  for (size_t x = 0; x < nx; ++x)
    for (size_t y = 0; y < ny; ++y) pair.out_pmf[y] += px[x] * m[x][y];
  pair.posterior.assign(ny, std::vector<double>(nx, 0.0));
  for (size_t y = 0; y < ny; ++y)
    for (size_t x = 0; x < nx; ++x)
      pair.posterior[y][x] = pair.out_pmf[y] > 0 ? px[x] * m[x][y] / pair.out_pmf[y] : 0.0;
  pair.in_cum.assign(nx + 1, 0.0);
  for (size_t x = 0; x < nx; ++x) pair.in_cum[x + 1] = pair.in_cum[x] + px[x];
  pair.in_cum[nx] = 1.0;
  pair.out_cum.assign(ny + 1, 0.0);
  for (size_t y = 0; y < ny; ++y) pair.out_cum[y + 1] = pair.out_cum[y] + pair.out_pmf[y];
  pair.out_cum[ny] = 1.0;
}

double dmc_mutual_information(const InputChannelPair& pair) {
  const auto& m = pair.channel->matrix();
  double I = 0.0;
  for (const auto& at : pair.input->atoms()) {
    auto x = static_cast<size_t>(at.x);
    for (size_t y = 0; y < m[x].size(); ++y) {
      double pyx = m[x][y];
      if (pyx > 0 && at.mass > 0) I += at.mass * pyx * std::log2(pyx / pair.out_pmf[y]);
    }
  }
  return I;
}

PairPtr finalize(std::shared_ptr<InputChannelPair> pair, double tol = 1e-9) {
  if (pair->is_dmc()) fill_dmc_caches(*pair);
  pair->output = output_distribution(*pair, tol);
  pair->mi_bits = mutual_information(*pair, tol);
  return pair;
}

}  // namespace

ChannelPtr dmc_channel(std::vector<std::vector<double>> matrix, std::string label) {
  return std::make_shared<DmcChannel>(std::move(matrix), std::move(label));
}

ChannelPtr bsc_channel(double p) {
  return dmc_channel({{1.0 - p, p}, {p, 1.0 - p}}, "bsc(" + std::to_string(p) + ")");
}

ChannelPtr bec_channel(double eps) {
  return dmc_channel({{1.0 - eps, 0.0, eps}, {0.0, 1.0 - eps, eps}}, "bec(" + std::to_string(eps) + ")");
}

ChannelPtr additive_channel(DistPtr noise_dist, std::string label) {
  return std::make_shared<AdditiveChannel>(std::move(noise_dist), std::move(label));
}

PairPtr make_awgn_pair(double input_power, double noise_variance) {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = PairKind::awgn;
  pair->P = input_power;
  pair->N = noise_variance;
  pair->snr = input_power / noise_variance;
  pair->label = "awgn(snr=" + std::to_string(pair->snr) + ")";
  pair->input = gaussian_dist(0.0, input_power);
  pair->channel = additive_channel(gaussian_dist(0.0, noise_variance), "awgn_noise");
  return finalize(pair);
}

PairPtr make_bsc_pair(double crossover) {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = PairKind::bsc;
  pair->p = crossover;
  pair->label = "bsc(" + std::to_string(crossover) + ")";
  pair->input = bernoulli_dist(0.5);
  pair->channel = bsc_channel(crossover);
  return finalize(pair);
}

PairPtr make_bec_pair(double eps) {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = PairKind::bec;
  pair->eps = eps;
  pair->label = "bec(" + std::to_string(eps) + ")";
  pair->input = bernoulli_dist(0.5);
  pair->channel = bec_channel(eps);
  return finalize(pair);
}

PairPtr make_uniform_pair() {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = PairKind::uniform_add;
  pair->label = "uniform";
  pair->input = uniform_dist(0.0, 1.0);
  pair->channel = additive_channel(uniform_dist(0.0, 1.0), "uniform_noise");
  return finalize(pair);
}

PairPtr make_exponential_pair() {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = PairKind::exp_add;
  pair->label = "exponential";
  pair->input = exponential_dist(1.0);
  pair->channel = additive_channel(exponential_dist(1.0), "exp_noise");
  return finalize(pair);
}

PairPtr make_exp_mean_pair(double a, double b) {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = PairKind::exp_mean;
  pair->a = a;
  pair->b = b;
  pair->label = "exp_mean(a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")";
  pair->input = mixed_exponential_dist(a, b);
  pair->channel = additive_channel(exponential_dist(1.0 / b), "exp_noise");
  return finalize(pair);
}

PairPtr make_dmc_pair(DistPtr input, ChannelPtr channel) {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = PairKind::dmc;
  pair->label = "dmc:" + channel->label();
  pair->input = std::move(input);
  pair->channel = std::move(channel);
  if (!pair->channel->is_dmc()) fail(errc::not_discrete, "make_dmc_pair with non-DMC channel");
  return finalize(pair);
}

PairPtr make_generic_pair(DistPtr input, ChannelPtr channel) {
  auto pair = std::make_shared<InputChannelPair>();
  pair->kind = channel->is_dmc() ? PairKind::dmc : PairKind::generic;
  pair->label = "generic:" + channel->label();
  pair->input = std::move(input);
  pair->channel = std::move(channel);
  return finalize(pair);
}

DistPtr InputChannelPair::inverse(double y) const { return inverse_channel(*this, y); }

DistPtr output_distribution(const InputChannelPair& pair, double tol) {
  switch (pair.kind) {
    case PairKind::awgn:
      return gaussian_dist(0.0, pair.P + pair.N);
    case PairKind::uniform_add:
      return triangular_conv_dist();
    case PairKind::exp_add:
      return gamma2_dist();
    case PairKind::exp_mean:
      return exponential_dist(1.0 / (pair.a + pair.b));
    case PairKind::bsc:
    case PairKind::bec:
    case PairKind::dmc: {
      std::vector<double> ys(pair.out_pmf.size());
      std::iota(ys.begin(), ys.end(), 0.0);
      return discrete_dist(ys, pair.out_pmf);
    }
    case PairKind::generic:
      break;
  }
  // Numeric mixture: f_Y(y) = sum_atoms + integral over the continuous part.
  auto input = pair.input;
  auto channel = pair.channel;
  auto xsup = input->support();
  auto zsup = channel->noise() ? channel->noise()->support() : SupportInterval{-1e18, 1e18};
  auto pdf = [input, channel, xsup, zsup, tol](double y) {
    double v = 0.0;
    for (const auto& at : input->atoms()) v += at.mass * channel->conditional(at.x)->density(y);
    if (input->kind() != ScalarDistribution::Kind::discrete) {
      // Only x with y - x inside the noise support contribute; clipping keeps
      // narrow slivers near the output edges visible to the quadrature nodes.
      double lo = std::max(xsup.lo, y - zsup.hi), hi = std::min(xsup.hi, y - zsup.lo);
      if (lo < hi)
        v += integrate(
            [&](double x) {
              double fx = input->density(x);
              return fx > 0 ? fx * channel->conditional(x)->density(y) : 0.0;
            },
            lo, hi, tol);
    }
    return v;
  };
  SupportInterval ysup{xsup.lo + zsup.lo, xsup.hi + zsup.hi};
  return numeric_pdf_dist(pdf, ysup, "output:" + pair.label);
}

DistPtr inverse_channel(const InputChannelPair& pair, double y) {
  switch (pair.kind) {
    case PairKind::awgn: {
      double g = pair.snr / (1.0 + pair.snr);
      return gaussian_dist(g * y, pair.P / (1.0 + pair.snr));
    }
    case PairKind::uniform_add:
      if (y <= 0 || y >= 2) fail(errc::unsupported_output, "y=" + std::to_string(y));
      if (y <= 1) return uniform_dist(0.0, y);
      return uniform_dist(y - 1.0, 1.0);
    case PairKind::exp_add:
      if (y <= 0) fail(errc::unsupported_output, "y=" + std::to_string(y));
      return uniform_dist(0.0, y);
    case PairKind::exp_mean:
      if (y <= 0) fail(errc::unsupported_output, "y=" + std::to_string(y));
      return std::make_shared<TiltedExpPosterior>(pair.a, pair.b, y);
    case PairKind::bsc:
    case PairKind::bec:
    case PairKind::dmc: {
      auto yi = static_cast<size_t>(y);
      if (yi >= pair.out_pmf.size() || static_cast<double>(yi) != y || pair.out_pmf[yi] <= 0)
        fail(errc::unsupported_output, "y=" + std::to_string(y));
      std::vector<double> xs, ps;
      for (size_t x = 0; x < pair.posterior[yi].size(); ++x) {
        xs.push_back(static_cast<double>(x));
        ps.push_back(pair.posterior[yi][x]);
      }
      return discrete_dist(xs, ps);
    }
    case PairKind::generic:
      break;
  }
  double fy = pair.output->density(y);
  if (fy <= 0) fail(errc::unsupported_output, "zero output density at y=" + std::to_string(y));
  auto input = pair.input;
  auto channel = pair.channel;
  auto pdf = [input, channel, fy, y](double x) {
    double fx = input->density(x);
    return fx > 0 ? fx * channel->conditional(x)->density(y) / fy : 0.0;
  };
  return numeric_pdf_dist(pdf, input->support(), "posterior:" + pair.label);
}

double entropy_bits(const ScalarDistribution& d, double tol) {
  if (d.kind() == ScalarDistribution::Kind::discrete) {
    double h = 0.0;
    for (const auto& at : d.atoms())
      if (at.mass > 0) h -= at.mass * std::log2(at.mass);
    return h;
  }
  if (!d.atoms().empty()) fail(errc::integration_failed, "entropy of mixed law " + d.label());
  if (double h = d.entropy_hint_bits(); !std::isnan(h)) return h;
  auto s = d.support();
  return integrate(
      [&d](double x) {
        double f = d.density(x);
        return f > 1e-300 ? -f * std::log2(f) : 0.0;
      },
      s.lo, s.hi, tol);
}

double mutual_information(const InputChannelPair& pair, double tol) {
  if (pair.is_dmc()) return dmc_mutual_information(pair);
  if (pair.channel->noise()) {
    // Additive: I = h(Y) - h(Z), any input law.
    DistPtr out = pair.output ? pair.output : output_distribution(pair, tol);
    return entropy_bits(*out, tol * 0.5) - entropy_bits(*pair.channel->noise(), tol * 0.5);
  }
  // General continuous pair: double quadrature over the input law.
  auto out = pair.output ? pair.output : output_distribution(pair, tol);
  auto inner = [&](double x) {
    auto cond = pair.channel->conditional(x);
    auto ys = cond->support();
    return integrate(
        [&](double y) {
          double f = cond->density(y), g = out->density(y);
          return (f > 1e-300 && g > 1e-300) ? f * std::log2(f / g) : 0.0;
        },
        ys.lo, ys.hi, tol);
  };
  double I = 0.0;
  for (const auto& at : pair.input->atoms()) I += at.mass * inner(at.x);
  if (pair.input->kind() != ScalarDistribution::Kind::discrete) {
    auto s = pair.input->support();
    I += integrate([&](double x) { return pair.input->density(x) * inner(x); }, s.lo, s.hi, tol);
  }
  return I;
}

double empirical_constraint(const std::vector<double>& xs, const ConstraintFunction& cf) {
  if (xs.empty()) fail(errc::config_error, "empirical_constraint: empty sequence");
  double s = 0.0;
  for (double x : xs) s += cf.eta(x);
  return s / static_cast<double>(xs.size());
}

std::pair<double, DistPtr> capacity_dmc(const MemorylessChannel& channel, double tol) {
  const auto& m = channel.matrix();
  size_t nx = m.size(), ny = m[0].size();
  std::vector<double> r(nx, 1.0 / nx), py(ny), d(nx);
  double cap_nats = 0.0;
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(py.begin(), py.end(), 0.0);
    for (size_t x = 0; x < nx; ++x)
      for (size_t y = 0; y < ny; ++y) py[y] += r[x] * m[x][y];
    double up = -1e300, lo = 0.0;
    for (size_t x = 0; x < nx; ++x) {
      double dx = 0.0;
      for (size_t y = 0; y < ny; ++y)
        if (m[x][y] > 0) dx += m[x][y] * std::log(m[x][y] / py[y]);
      d[x] = dx;
      up = std::max(up, dx);
      lo += r[x] * dx;
    }
    cap_nats = lo;
    if (up - lo < tol * std::log(2.0)) break;
    double z = 0.0;
    for (size_t x = 0; x < nx; ++x) {
      r[x] *= std::exp(d[x] - lo);
      z += r[x];
    }
    for (auto& v : r) v /= z;
  }
  std::vector<double> xs(nx);
  std::iota(xs.begin(), xs.end(), 0.0);
  double z = std::accumulate(r.begin(), r.end(), 0.0);
  for (auto& v : r) v /= z;
  return {cap_nats / std::log(2.0), discrete_dist(xs, r)};
}

}  // namespace pm
