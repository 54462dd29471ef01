#include "pm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pm/distribution.hpp"
#include "pm/error.hpp"
#include "pm/rng.hpp"
#include "session_impl.hpp"

namespace pm {
namespace {

UnitValue round_unit(const UnitValue& v, long prec) { return UnitValue(v.r().round_to(prec)); }

// One recursion step in quantile space: the posterior-cdf map the session
// composes. For mu-variants this is the inner conditional cdf chain (the
// theta0-space posterior); the transmitted state is mu of it.
UnitValue chain_step(const Transcript& t, const UnitValue& v, const UnitValue& phi) {
  if (t.mu && !t.mu->is_identity()) return mu_inner_cdf(*t.kernel, *t.mu, v, phi);
  return t.kernel->forward_norm(v, phi);
}

UnitValue state_of(const Transcript& t, const UnitValue& w) {
  if (t.mu && !t.mu->is_identity()) return t.mu->map(w);
  return w;
}

size_t dmc_symbol_index(const InputChannelPair& pair, const UnitValue& theta) {
  // inf{x : F_X(x) > theta}
  const auto& cum = pair.in_cum;
  size_t x = 0;
  while (x + 2 < cum.size() && theta.r() >= cum[x + 1]) ++x;
  if (theta.r() >= cum[x + 1] && x + 2 == cum.size()) return cum.size() - 2;
  return x;
}

double rate_of(const UnitValue& lo, const UnitValue& hi, int n) {
  Real len = hi.r() - lo.r();
  if (len.sign() <= 0) return std::numeric_limits<double>::infinity();
  return (-log2(len) / static_cast<double>(n)).to_double();
}

bool strictly_inside(const UnitValue& lo, const UnitValue& x, const UnitValue& hi) {
  return lo.r() < x.r() && x.r() < hi.r();
}

}  // namespace

long session_precision(int n, const SessionOptions& opt) {
  long prec = std::max(opt.precision, 128L);
  if (opt.target_rate) {
    double bits = static_cast<double>(n) * *opt.target_rate;
    if (opt.explicit_precision) {
      if (bits > static_cast<double>(opt.precision) / 2.0 - 32.0)
        fail(errc::precision_exhausted,
             "horizon n*R = " + std::to_string(bits) + " bits exceeds precision/2 - 32 at " +
                 std::to_string(opt.precision) + " bits");
    } else {
      prec = std::max(prec, 2 * (static_cast<long>(std::ceil(bits)) + 64));
    }
  }
  return prec;
}

Transcript detail::run_session_over(PairPtr pair, std::optional<Upf> mu,
                                    const std::optional<UnitValue>& theta0, int n,
                                    std::uint64_t seed, std::uint64_t stream_id,
                                    const SessionOptions& opt, const MemorylessChannel* actual) {
  if (n < 1) fail(errc::config_error, "run_session: horizon must be >= 1");
  Transcript t;
  t.pair = pair;
  t.kernel = make_kernel(pair);
  t.mu = std::move(mu);
  t.n = n;
  t.precision = session_precision(n, opt);
  t.seed = seed;
  t.stream_id = stream_id;

  RngStream rng(seed, stream_id);
  t.theta0 = theta0 ? round_unit(*theta0, t.precision) : UnitValue(draw_real(rng, t.precision));

  t.xs.reserve(n);
  t.ys.reserve(n);
  t.thetas.reserve(n + 1);
  t.phis.reserve(n);
  t.lams.reserve(n);

  UnitValue w = t.theta0;              // posterior-chain state (theta0-space)
  t.thetas.push_back(state_of(t, w));  // Theta_1
  const bool dmc = pair->is_dmc();
  const MemorylessChannel& ch = actual ? *actual : *pair->channel;
  for (int k = 0; k < n; ++k) {
    const UnitValue& th = t.thetas.back();
    Real x(t.precision);
    Real y(t.precision);
    if (dmc) {
      size_t xi = dmc_symbol_index(*pair, th);
      x = Real(static_cast<double>(xi), t.precision);
      const auto& row = ch.matrix()[xi];
      double u = draw_double(rng);
      double acc = 0.0;
      size_t yi = row.size() - 1;
      for (size_t j = 0; j < row.size(); ++j) {
        acc += row[j];
        if (u < acc) {
          yi = j;
          break;
        }
      }
      y = Real(static_cast<double>(yi), t.precision);
    } else {
      x = pair->input->inv_cdf_r(th.r());
      DistPtr noise = ch.noise();
      if (noise) {
        y = x + noise->inv_cdf_r(draw_real(rng, t.precision));
      } else {
        y = Real(sample(*ch.conditional(x.to_double()), rng), t.precision);
      }
    }
    UnitValue lam(draw_real(rng, t.precision));
    UnitValue phi;
    try {
      if (actual && !dmc && !pair->output->in_support(y.to_double()))
        fail(errc::out_of_support, "channel output y=" + std::to_string(y.to_double()) +
                                       " outside the design output support");
      phi = round_unit(UnitValue(normalize_output_r(*pair, y, lam)), t.precision);
      if (!dmc && (phi.r().sign() <= 0 || phi.r() >= 1.0))
        fail(errc::precision_exhausted,
             "normalized output saturated at " + std::to_string(t.precision) + " bits");
      w = round_unit(chain_step(t, w, phi), t.precision);
    } catch (const Error& e) {
      fail(e.code(), "step " + std::to_string(k + 1) + ": " + e.what());
    }
    t.xs.push_back(std::move(x));
    t.ys.push_back(std::move(y));
    t.phis.push_back(phi);
    t.lams.push_back(lam);
    t.thetas.push_back(state_of(t, w));
  }
  return t;
}

Transcript run_session(PairPtr pair, std::optional<Upf> mu, const std::optional<UnitValue>& theta0,
                       int n, std::uint64_t seed, std::uint64_t stream_id,
                       const SessionOptions& opt) {
  return detail::run_session_over(std::move(pair), std::move(mu), theta0, n, seed, stream_id, opt,
                                  nullptr);
}

UnitValue posterior_cdf(const Transcript& t, const UnitValue& theta, int k) {
  if (k < 1 || k > t.n + 1) fail(errc::config_error, "posterior_cdf: k out of range");
  UnitValue v = round_unit(theta, t.precision);
  for (int j = 0; j + 1 < k; ++j) v = round_unit(chain_step(t, v, t.phis[j]), t.precision);
  return v;
}

UnitValue posterior_inv(const Transcript& t, const UnitValue& s, int k, long prec) {
  if (k < 1 || k > t.n + 1) fail(errc::config_error, "posterior_inv: k out of range");
  if (prec <= 0) prec = t.precision;
  if (t.mu && !t.mu->is_identity()) {
    // no closed-form inverse of the set-probability chain; bisect on G_k
    Real lo(0.0, prec), hi(1.0, prec);
    for (long i = 0; i < prec; ++i) {
      Real mid = (lo + hi) * 0.5;
      if (posterior_cdf(t, UnitValue(mid), k).r() > s.r())
        hi = mid;
      else
        lo = mid;
    }
    return UnitValue((lo + hi) * 0.5);
  }
  UnitValue v = round_unit(s, prec);
  for (int j = k - 2; j >= 0; --j) {
    UnitValue phi = round_unit(t.phis[j], prec);
    v = round_unit(t.kernel->inverse_norm(v, phi), prec);
  }
  return v;
}

double posterior_log_density_at_message(const Transcript& t) {
  const auto& pair = *t.pair;
  double acc = 0.0;
  for (int k = 0; k < t.n; ++k) {
    double f;
    if (pair.is_dmc()) {
      auto xi = static_cast<size_t>(t.xs[k].to_double());
      size_t yi = t.kernel->branch_of(t.phis[k]);
      f = pair.out_pmf[yi] > 0 ? pair.channel->matrix()[xi][yi] / pair.out_pmf[yi] : 0.0;
    } else {
      double x = t.xs[k].to_double(), y = t.ys[k].to_double();
      double fy = pair.output->density(y);
      f = fy > 0 ? pair.channel->conditional(x)->density(y) / fy : 0.0;
    }
    if (!(f > 0))
      fail(errc::density_underflow, "zero conditional density at step " + std::to_string(k + 1));
    acc += std::log2(f);
  }
  return acc / t.n;
}

namespace {

// Posterior mass of (theta, theta+len) via the AWGN affine representation
// G_{n+1}(theta) = F(A z(theta) + B) in z-units; valid in doubles while the
// interval stays well above the 53-bit floor.
struct AffinePosterior {
  double A = 1.0, B = 0.0;
  double cdf(double theta) const {
    if (theta <= 0.0) return 0.0;
    if (theta >= 1.0) return 1.0;
    return std_normal_cdf(A * std_normal_quantile(theta) + B);
  }
  double inv_cdf(double q) const {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return 1.0;
    return std_normal_cdf((std_normal_quantile(q) - B) / A);
  }
};

AffinePosterior awgn_affine(const Transcript& t) {
  AffinePosterior ap;
  double snr = t.pair->snr;
  double m = std::sqrt(1.0 + snr);
  double g = snr / (1.0 + snr);
  double sp = std::sqrt(t.pair->P / (1.0 + snr));
  for (int k = 0; k < t.n; ++k) {
    ap.A *= m;
    ap.B = m * ap.B - (g / sp) * t.ys[k].to_double();
  }
  return ap;
}

constexpr double kGolden = 0.6180339887498949;

// Golden-section maximization of f on [a,b] (doubles).
double golden_max(const std::function<double(double)>& f, double a, double b, int iters) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 >= f2) {  // keep the left bracket on ties
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

}  // namespace

DecodedInterval decode_fixed_rate(const Transcript& t, double rate) {
  if (t.n < 1) fail(errc::config_error, "decode_fixed_rate: empty transcript");
  if (rate <= 0) fail(errc::config_error, "decode_fixed_rate: rate must be positive");
  double nR = t.n * rate;
  if (nR > static_cast<double>(t.precision) / 2.0 - 32.0)
    fail(errc::precision_exhausted, "interval 2^{-nR} unresolvable: nR = " + std::to_string(nR) +
                                        " at " + std::to_string(t.precision) + " bits");
  long prec = t.precision;
  Real len = pow(Real(2.0, prec), -nR);
  const int cells = 1024;

  DecodedInterval out;
  out.decoder = DecoderKind::fixed_rate;
  out.target_rate = rate;

  // The posterior concentrates in a region far narrower than any fixed theta
  // grid, so the search runs over the start quantile q instead: the interval
  // (G^{-1}(q), G^{-1}(q)+L) has mass G(G^{-1}(q)+L) - q, and the q axis is
  // uniformly informative regardless of concentration.
  if (t.pair->kind == PairKind::awgn && (!t.mu || t.mu->is_identity()) && nR <= 40.0) {
    AffinePosterior ap = awgn_affine(t);
    double L = std::exp2(-nR);
    auto mass = [&](double q) {
      double th = std::min(ap.inv_cdf(q), 1.0 - L);
      return ap.cdf(th + L) - ap.cdf(th);
    };
    int best = 0;
    double best_mass = -1.0;
    for (int i = 0; i <= cells; ++i) {
      double m = mass(static_cast<double>(i) / cells);
      if (m > best_mass) {
        best_mass = m;
        best = i;
      }
    }
    double a = static_cast<double>(std::max(0, best - 1)) / cells;
    double b = static_cast<double>(std::min(cells, best + 1)) / cells;
    double qstar = golden_max(mass, a, b, 48);
    out.lo = UnitValue(std::min(ap.inv_cdf(qstar), 1.0 - L), prec);
    out.hi = UnitValue(min(out.lo.r() + len, Real(1.0, prec)));
  } else {
    long ps = std::min(prec, prec / 2 + 64);  // search precision; endpoints redone at full
    Real cap = Real(1.0, ps) - len.round_to(ps);
    auto theta_at = [&](const Real& q) {
      return min(posterior_inv(t, UnitValue(q), t.n + 1, ps).r(), cap);
    };
    auto mass = [&](const Real& q) {
      Real th = theta_at(q);
      return posterior_cdf(t, UnitValue(min(th + len, Real(1.0, ps))), t.n + 1).r() -
             posterior_cdf(t, UnitValue(th), t.n + 1).r();
    };
    int best = 0;
    Real best_mass(-1.0, ps);
    for (int i = 0; i <= cells; ++i) {
      Real m = mass(Real(static_cast<double>(i) / cells, ps));
      if (m > best_mass) {
        best_mass = m;
        best = i;
      }
    }
    Real a(static_cast<double>(std::max(0, best - 1)) / cells, ps);
    Real b(static_cast<double>(std::min(cells, best + 1)) / cells, ps);
    Real x1 = b - (b - a) * kGolden, x2 = a + (b - a) * kGolden;
    Real f1 = mass(x1), f2 = mass(x2);
    for (int i = 0; i < 48; ++i) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - (b - a) * kGolden;
        f1 = mass(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + (b - a) * kGolden;
        f2 = mass(x2);
      }
    }
    Real qstar = f1 >= f2 ? x1 : x2;
    out.lo = UnitValue(min(posterior_inv(t, UnitValue(qstar.round_to(prec)), t.n + 1).r(),
                           Real(1.0, prec) - len));
    out.hi = UnitValue(min(out.lo.r() + len, Real(1.0, prec)));
  }
  out.rate = rate_of(out.lo, out.hi, t.n);
  out.contains_message = strictly_inside(out.lo, t.theta0, out.hi);
  return out;
}

DecodedInterval decode_variable_rate(const Transcript& t, double delta, int grid) {
  if (t.n < 1) fail(errc::config_error, "decode_variable_rate: empty transcript");
  if (delta < 0 || delta >= 1) fail(errc::config_error, "decode_variable_rate: delta in [0,1)");
  if (grid < 2) fail(errc::config_error, "decode_variable_rate: grid too small");
  long prec = t.precision;

  DecodedInterval out;
  out.decoder = DecoderKind::variable_rate_posterior;
  out.delta = delta;

  if (delta == 0.0) {
    out.lo = posterior_inv(t, UnitValue(0.0, prec), t.n + 1);
    out.hi = posterior_inv(t, UnitValue(1.0, prec), t.n + 1);
  } else {
    // search at reduced precision, final endpoints at full precision
    long ps = std::min(prec, prec / 2 + 64);
    auto length_at = [&](const Real& trim) {
      Real lo = posterior_inv(t, UnitValue(trim), t.n + 1, ps).r();
      Real hi = posterior_inv(t, UnitValue(trim + (1.0 - delta)), t.n + 1, ps).r();
      return hi - lo;
    };
    Real d(delta, ps);
    Real best_t(0.0, ps);
    Real best_len = length_at(best_t);
    for (int i = 1; i <= grid; ++i) {
      Real trim = d * (static_cast<double>(i) / grid);
      Real len = length_at(trim);
      if (len < best_len) {
        best_len = len;
        best_t = trim;
      }
    }
    Real half_cell = d / (2.0 * grid);
    for (int round = 0; round < 2; ++round) {
      Real lo_t = max(best_t - half_cell, Real(0.0, ps));
      Real hi_t = min(best_t + half_cell, d);
      for (int i = 0; i <= 8; ++i) {
        Real trim = lo_t + (hi_t - lo_t) * (static_cast<double>(i) / 8.0);
        Real len = length_at(trim);
        if (len < best_len) {
          best_len = len;
          best_t = trim;
        }
      }
      half_cell = half_cell / 8.0;
    }
    Real trim = best_t.round_to(prec);
    out.lo = posterior_inv(t, UnitValue(trim), t.n + 1);
    out.hi = posterior_inv(t, UnitValue(trim + (1.0 - delta)), t.n + 1);
  }
  out.rate = rate_of(out.lo, out.hi, t.n);
  out.contains_message = strictly_inside(out.lo, t.theta0, out.hi);
  return out;
}

DecodedInterval decode_rollback(const Transcript& t, double delta, double alpha) {
  if (delta < 0 || delta >= 1) fail(errc::config_error, "decode_rollback: delta in [0,1)");
  if (alpha < 0 || alpha > 1) fail(errc::config_error, "decode_rollback: alpha in [0,1]");
  long prec = t.precision;
  Real d(delta, prec), a(alpha, prec);
  DecodedInterval out;
  out.decoder = DecoderKind::variable_rate_rollback;
  out.delta = delta;
  out.alpha = alpha;
  out.lo = posterior_inv(t, UnitValue((1.0 - a) * d), t.n + 1);
  out.hi = posterior_inv(t, UnitValue(1.0 - a * d), t.n + 1);
  out.rate = rate_of(out.lo, out.hi, t.n);
  out.contains_message = strictly_inside(out.lo, t.theta0, out.hi);
  return out;
}

TrajectoryPair trajectories(const Transcript& t, double delta) {
  if (delta <= 0) fail(errc::config_error, "trajectories: delta must be positive");
  long prec = t.precision;
  TrajectoryPair tp;
  tp.delta = delta;
  Real th0 = t.theta0.r();
  Real dm = min(Real(delta, prec), th0 * 0.5);
  Real dp = min(Real(delta, prec), (1.0 - th0) * 0.5);
  UnitValue lo(th0 - dm), hi(th0 + dp);
  tp.neg.push_back(lo);
  tp.pos.push_back(hi);
  for (int k = 0; k < t.n; ++k) {
    lo = round_unit(chain_step(t, lo, t.phis[k]), prec);
    hi = round_unit(chain_step(t, hi, t.phis[k]), prec);
    tp.neg.push_back(lo);
    tp.pos.push_back(hi);
  }
  return tp;
}

std::string serialize_transcript(const Transcript& t) {
  std::ostringstream os;
  os << "pm-transcript v1\n";
  os << "pair " << t.pair->label << "\n";
  os << "n " << t.n << "\n";
  os << "precision " << t.precision << "\n";
  os << "seed " << t.seed << " " << t.stream_id << "\n";
  if (t.mu) {
    os << "mu " << t.mu->label() << " " << t.mu->cells();
    for (double b : t.mu->breaks()) os << " " << Real(b, 64).to_string();
    for (size_t p : t.mu->perm()) os << " " << p;
    os << "\n";
  } else {
    os << "mu none\n";
  }
  os << "theta0 " << t.theta0.to_string() << "\n";
  for (int k = 0; k < t.n; ++k) {
    os << "step " << (k + 1) << " " << t.xs[k].to_string() << " " << t.ys[k].to_string() << " "
       << t.thetas[k].to_string() << " " << t.phis[k].to_string() << " " << t.lams[k].to_string()
       << "\n";
  }
  os << "final " << t.thetas[t.n].to_string() << "\n";
  return os.str();
}

Transcript parse_transcript(const std::string& text, PairPtr pair) {
  std::istringstream is(text);
  std::string line;
  auto expect = [&](const std::string& key) {
    if (!std::getline(is, line) || line.rfind(key, 0) != 0)
      fail(errc::config_error, "transcript: expected '" + key + "'");
    return line.size() > key.size() + 1 ? line.substr(key.size() + 1) : std::string();
  };
  if (!std::getline(is, line) || line != "pm-transcript v1")
    fail(errc::config_error, "transcript: bad header");
  Transcript t;
  t.pair = pair;
  t.kernel = make_kernel(pair);
  std::string label = expect("pair");
  if (label != pair->label)
    fail(errc::config_error, "transcript pair '" + label + "' does not match '" + pair->label + "'");
  t.n = std::stoi(expect("n"));
  t.precision = std::stol(expect("precision"));
  {
    std::istringstream ss(expect("seed"));
    ss >> t.seed >> t.stream_id;
  }
  if (!std::getline(is, line) || line.rfind("mu ", 0) != 0)
    fail(errc::config_error, "transcript: expected 'mu'");
  if (line != "mu none") {
    std::istringstream ss(line.substr(3));
    std::string mlabel;
    size_t cells;
    ss >> mlabel >> cells;
    std::vector<double> breaks(cells + 1);
    std::vector<size_t> perm(cells);
    for (auto& b : breaks) {
      std::string v;
      ss >> v;
      b = Real::from_string(v, 64).to_double();
    }
    for (auto& p : perm) ss >> p;
    t.mu = Upf(mlabel, std::move(breaks), std::move(perm));
  }
  t.theta0 = UnitValue::from_string(expect("theta0"), t.precision);
  for (int k = 0; k < t.n; ++k) {
    std::istringstream ss(expect("step"));
    int idx;
    std::string x, y, th, ph, lam;
    ss >> idx >> x >> y >> th >> ph >> lam;
    if (idx != k + 1) fail(errc::config_error, "transcript: step index mismatch");
    t.xs.push_back(Real::from_string(x, t.precision));
    t.ys.push_back(Real::from_string(y, t.precision));
    t.thetas.push_back(UnitValue::from_string(th, t.precision));
    t.phis.push_back(UnitValue::from_string(ph, t.precision));
    t.lams.push_back(UnitValue::from_string(lam, t.precision));
  }
  t.thetas.push_back(UnitValue::from_string(expect("final"), t.precision));
  return t;
}

}  // namespace pm
