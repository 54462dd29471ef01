#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <vector>

#include "pm/analysis.hpp"
#include "pm/error.hpp"
#include "pm/mismatch.hpp"
#include "pm/properties.hpp"
#include "pm/quadrature.hpp"
#include "pm/simulate.hpp"
#include "pm/stats.hpp"

namespace pm::cli {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail(errc::config_error, ctx + ": expected an object");
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& ctx) {
  require_object(j, ctx);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      fail(errc::config_error, ctx + ": unknown key '" + it.key() + "'");
}

double need_num(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number())
    fail(errc::config_error, ctx + ": missing numeric '" + key + "'");
  return j[key].get<double>();
}

double opt_num(const json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) fail(errc::config_error, "'" + key + "' must be numeric");
  return j[key].get<double>();
}

long opt_int(const json& j, const std::string& key, long dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_integer()) fail(errc::config_error, "'" + key + "' must be an integer");
  return j[key].get<long>();
}

std::string opt_str(const json& j, const std::string& key, const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_string()) fail(errc::config_error, "'" + key + "' must be a string");
  return j[key].get<std::string>();
}

std::vector<double> num_list(const json& j, const std::string& key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (j[key].is_number()) {
    out.push_back(j[key].get<double>());
    return out;
  }
  if (!j[key].is_array()) fail(errc::config_error, "'" + key + "' must be a number or list");
  for (const auto& v : j[key]) {
    if (!v.is_number()) fail(errc::config_error, "'" + key + "' entries must be numeric");
    out.push_back(v.get<double>());
  }
  return out;
}

PairPtr build_pair(const json& j) {
  check_keys(j, {"kind", "p", "power", "noise", "eps", "a", "b", "matrix", "input"}, "pair");
  std::string kind = opt_str(j, "kind", "");
  if (kind == "awgn") return make_awgn_pair(opt_num(j, "power", 3.0), opt_num(j, "noise", 1.0));
  if (kind == "bsc") return make_bsc_pair(need_num(j, "p", "pair"));
  if (kind == "bec") return make_bec_pair(need_num(j, "eps", "pair"));
  if (kind == "uniform") return make_uniform_pair();
  if (kind == "exponential") return make_exponential_pair();
  if (kind == "exp_mean") return make_exp_mean_pair(opt_num(j, "a", 1.0), opt_num(j, "b", 1.0));
  if (kind == "dmc") {
    if (!j.contains("matrix") || !j["matrix"].is_array())
      fail(errc::config_error, "pair: dmc needs a 'matrix' list of rows");
    std::vector<std::vector<double>> m;
    for (const auto& row : j["matrix"]) m.push_back(row.get<std::vector<double>>());
    std::vector<double> pmf = j.contains("input")
                                  ? j["input"].get<std::vector<double>>()
                                  : std::vector<double>(m.size(), 1.0 / m.size());
    std::vector<double> xs(pmf.size());
    for (size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
    return make_dmc_pair(discrete_dist(xs, pmf), dmc_channel(std::move(m)));
  }
  fail(errc::config_error, "pair: unknown kind '" + kind + "'");
}

std::optional<Upf> build_mu(const json& cfg) {
  if (!cfg.contains("mu")) return std::nullopt;
  const json& j = cfg["mu"];
  check_keys(j, {"kind", "breaks", "perm"}, "mu");
  std::string kind = opt_str(j, "kind", "permutation");
  if (kind == "three_piece") return three_piece_shift_upf();
  if (kind == "permutation") {
    if (!j.contains("breaks") || !j.contains("perm"))
      fail(errc::config_error, "mu: permutation needs 'breaks' and 'perm'");
    return permutation_upf(j["breaks"].get<std::vector<double>>(),
                           j["perm"].get<std::vector<size_t>>());
  }
  fail(errc::config_error, "mu: unknown kind '" + kind + "'");
}

ChannelPtr build_true_channel(const json& j) {
  check_keys(j, {"kind", "variance", "scale", "p", "eps", "matrix", "a", "b"}, "true_channel");
  std::string kind = opt_str(j, "kind", "");
  if (kind == "gaussian")
    return additive_channel(gaussian_dist(0.0, need_num(j, "variance", "true_channel")),
                            "gaussian_add");
  if (kind == "laplace") {
    double v = need_num(j, "variance", "true_channel");
    return additive_channel(laplace_dist(0.0, std::sqrt(v / 2.0)), "laplace_add");
  }
  if (kind == "cauchy")
    return additive_channel(cauchy_dist(0.0, opt_num(j, "scale", 1.0)), "cauchy_add");
  if (kind == "uniform")
    return additive_channel(uniform_dist(opt_num(j, "a", 0.0), opt_num(j, "b", 1.0)),
                            "uniform_add");
  if (kind == "exponential")
    return additive_channel(exponential_dist(opt_num(j, "a", 1.0)), "exp_add");
  if (kind == "bsc") return bsc_channel(need_num(j, "p", "true_channel"));
  if (kind == "bec") return bec_channel(need_num(j, "eps", "true_channel"));
  if (kind == "dmc") {
    std::vector<std::vector<double>> m;
    for (const auto& row : j["matrix"]) m.push_back(row.get<std::vector<double>>());
    return dmc_channel(std::move(m));
  }
  fail(errc::config_error, "true_channel: unknown kind '" + kind + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

struct TrialRow {
  int trial = 0;
  std::string lo, hi;
  double rate = 0.0;
  bool hit = false;
  double exponent = 0.0;
  double elapsed_ms = 0.0;
  std::string error;
};

enum class Decoder { fixed, variable, rollback };

Decoder parse_decoder(const std::string& s) {
  if (s == "fixed") return Decoder::fixed;
  if (s == "variable") return Decoder::variable;
  if (s == "rollback") return Decoder::rollback;
  fail(errc::config_error, "decoder must be fixed|variable|rollback, got '" + s + "'");
}

struct RunSpec {
  PairPtr pair;
  std::optional<Upf> mu;
  int n = 0;
  Decoder decoder = Decoder::variable;
  double rate = 0.0;   // fixed
  double delta = 0.0;  // variable / rollback
  double alpha = 0.5;  // rollback
  std::uint64_t seed = 0;
  SessionOptions opt;
};

double spec_param(const RunSpec& s) { return s.decoder == Decoder::fixed ? s.rate : s.delta; }

TrialRow run_trial(const RunSpec& s, int trial, std::uint64_t stream) {
  TrialRow row;
  row.trial = trial;
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto t = run_session(s.pair, s.mu, std::nullopt, s.n, s.seed, stream, s.opt);
    DecodedInterval d;
    switch (s.decoder) {
      case Decoder::fixed: d = decode_fixed_rate(t, s.rate); break;
      case Decoder::variable: d = decode_variable_rate(t, s.delta); break;
      case Decoder::rollback: d = decode_rollback(t, s.delta, s.alpha); break;
    }
    row.lo = d.lo.to_string();
    row.hi = d.hi.to_string();
    row.rate = d.rate;
    row.hit = d.contains_message;
    try {
      row.exponent = posterior_log_density_at_message(t);
    } catch (const Error& e) {
      row.exponent = std::nan("");
      row.error = sanitize(e.what());
    }
  } catch (const Error& e) {
    row.error = sanitize(e.what());
    row.exponent = std::nan("");
  }
  row.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

// Deterministic fan-out: results indexed by trial id, merged in order.
std::vector<TrialRow> run_trials(const RunSpec& s, int trials, std::uint64_t stream_base,
                                 int threads) {
  std::vector<TrialRow> rows(trials);
  if (threads < 1) threads = 1;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= trials) return;
      rows[i] = run_trial(s, i, stream_base + static_cast<std::uint64_t>(i));
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

struct Aggregate {
  int trials = 0, misses = 0, failures = 0;
  double p_e = 0.0, wilson_lo = 0.0, wilson_hi = 0.0;
  double mean_rate = 0.0, mean_exponent = 0.0;
};

Aggregate aggregate_rows(const std::vector<TrialRow>& rows) {
  Aggregate a;
  a.trials = static_cast<int>(rows.size());
  double rsum = 0.0, esum = 0.0;
  int rcount = 0, ecount = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) ++a.failures;
    if (!r.hit) ++a.misses;
    if (r.error.empty()) {
      rsum += r.rate;
      ++rcount;
      if (std::isfinite(r.exponent)) {
        esum += r.exponent;
        ++ecount;
      }
    }
  }
  a.p_e = a.trials ? static_cast<double>(a.misses) / a.trials : 0.0;
  auto [wl, wh] = wilson_interval(a.misses, a.trials);
  a.wilson_lo = wl;
  a.wilson_hi = wh;
  a.mean_rate = rcount ? rsum / rcount : std::nan("");
  a.mean_exponent = ecount ? esum / ecount : std::nan("");
  return a;
}

std::string csv_header(const json& cfg, const std::string& columns) {
  std::ostringstream os;
  os << "# pm-csv v1\n";
  os << "# command=" << opt_str(cfg, "command", "") << " seed=" << opt_int(cfg, "seed", 0) << "\n";
  os << columns << "\n";
  return os.str();
}

RunSpec base_spec(const json& cfg, PairPtr pair, int n, Decoder dec, double param) {
  RunSpec s;
  s.pair = std::move(pair);
  s.mu = build_mu(cfg);
  s.n = n;
  s.decoder = dec;
  s.seed = static_cast<std::uint64_t>(opt_int(cfg, "seed", 0));
  if (dec == Decoder::fixed)
    s.rate = param;
  else
    s.delta = param;
  s.alpha = opt_num(cfg, "alpha", 0.5);
  if (cfg.contains("precision")) {
    s.opt.precision = opt_int(cfg, "precision", 128);
    s.opt.explicit_precision = true;
  }
  // size the working precision to the information the horizon carries
  s.opt.target_rate = dec == Decoder::fixed ? s.rate : s.pair->mi_bits;
  return s;
}

const std::vector<std::string> kSimKeys = {"command", "pair",  "mu",    "n",         "decoder",
                                           "rate",    "delta", "alpha", "trials",    "seed",
                                           "precision", "threads", "out"};

CommandResult cmd_simulate(const json& cfg) {
  check_keys(cfg, kSimKeys, "simulate");
  auto pair = build_pair(cfg.contains("pair") ? cfg["pair"] : json::object());
  int n = static_cast<int>(opt_int(cfg, "n", 0));
  if (n < 1) fail(errc::config_error, "simulate: 'n' must be >= 1");
  int trials = static_cast<int>(opt_int(cfg, "trials", 0));
  if (trials < 1) fail(errc::config_error, "simulate: 'trials' must be >= 1");
  Decoder dec = parse_decoder(opt_str(cfg, "decoder", "variable"));
  double param = dec == Decoder::fixed ? need_num(cfg, "rate", "simulate")
                                       : opt_num(cfg, "delta", 1e-3);
  RunSpec s = base_spec(cfg, pair, n, dec, param);
  auto rows = run_trials(s, trials, 0, static_cast<int>(opt_int(cfg, "threads", 1)));

  std::ostringstream csv;
  csv << csv_header(cfg, "trial,n,param,lo,hi,rate,hit,exponent,elapsed_ms,error");
  for (const auto& r : rows)
    csv << r.trial << "," << n << "," << fmt(spec_param(s)) << "," << r.lo << "," << r.hi << ","
        << fmt(r.rate) << "," << (r.hit ? 1 : 0) << "," << fmt(r.exponent) << ","
        << fmt(r.elapsed_ms) << "," << r.error << "\n";

  auto a = aggregate_rows(rows);
  std::ostringstream rep;
  rep << "command simulate\n"
      << "pair " << pair->label << "\n"
      << "n " << n << "\n"
      << "trials " << a.trials << "\n"
      << "misses " << a.misses << "\n"
      << "failures " << a.failures << "\n"
      << "p_e " << fmt(a.p_e) << "\n"
      << "wilson_lo " << fmt(a.wilson_lo) << "\n"
      << "wilson_hi " << fmt(a.wilson_hi) << "\n"
      << "mean_rate " << fmt(a.mean_rate) << "\n"
      << "mean_exponent " << fmt(a.mean_exponent) << "\n";
  return {csv.str(), rep.str()};
}

CommandResult cmd_sweep(const json& cfg) {
  check_keys(cfg, kSimKeys, "sweep");
  auto pair = build_pair(cfg.contains("pair") ? cfg["pair"] : json::object());
  auto ns = num_list(cfg, "n");
  Decoder dec = parse_decoder(opt_str(cfg, "decoder", "variable"));
  auto params = dec == Decoder::fixed ? num_list(cfg, "rate") : num_list(cfg, "delta");
  if (ns.empty() || params.empty())
    fail(errc::config_error, "sweep: needs non-empty 'n' and 'rate'/'delta' grids");
  int trials = static_cast<int>(opt_int(cfg, "trials", 0));
  if (trials < 1) fail(errc::config_error, "sweep: 'trials' must be >= 1");
  int threads = static_cast<int>(opt_int(cfg, "threads", 1));

  std::ostringstream csv;
  csv << csv_header(cfg,
                    "n,param,trials,misses,failures,p_e,wilson_lo,wilson_hi,mean_rate,"
                    "mean_exponent");
  std::uint64_t cell = 0;
  for (double nd : ns) {
    int n = static_cast<int>(nd);
    if (n < 1) fail(errc::config_error, "sweep: 'n' entries must be >= 1");
    for (double param : params) {
      RunSpec s = base_spec(cfg, pair, n, dec, param);
      auto rows = run_trials(s, trials, cell * static_cast<std::uint64_t>(trials), threads);
      auto a = aggregate_rows(rows);
      csv << n << "," << fmt(param) << "," << a.trials << "," << a.misses << "," << a.failures
          << "," << fmt(a.p_e) << "," << fmt(a.wilson_lo) << "," << fmt(a.wilson_hi) << ","
          << fmt(a.mean_rate) << "," << fmt(a.mean_exponent) << "\n";
      ++cell;
    }
  }
  std::ostringstream rep;
  rep << "command sweep\npair " << pair->label << "\ncells " << cell << "\ntrials_per_cell "
      << trials << "\n";
  return {csv.str(), rep.str()};
}

WeightFunction parse_weight(const std::string& s) {
  if (s == "constant") return constant_weight();
  auto colon = s.find(':');
  if (s.rfind("symmetric_power", 0) == 0 && colon != std::string::npos)
    return symmetric_power_weight(std::stod(s.substr(colon + 1)));
  fail(errc::config_error, "unknown weight '" + s + "'");
}

ShapingFunction parse_shaping(const std::string& s, const InputChannelPair& pair) {
  if (s == "identity") return identity_shaping(pair);
  if (s == "sqrt_inv") return sqrt_inv_shaping();
  auto colon = s.find(':');
  if (s.rfind("power", 0) == 0 && colon != std::string::npos)
    return power_shaping(std::stod(s.substr(colon + 1)));
  fail(errc::config_error, "unknown shaping '" + s + "'");
}

CommandResult cmd_analyze(const json& cfg) {
  check_keys(cfg, {"command", "pair", "thresholds", "properties", "seed", "out"}, "analyze");
  auto pair = build_pair(cfg.contains("pair") ? cfg["pair"] : json::object());
  std::ostringstream rep;
  rep << "command analyze\npair " << pair->label << "\nmi_bits " << fmt(pair->mi_bits) << "\n";

  if (cfg.contains("thresholds")) {
    if (!cfg["thresholds"].is_array()) fail(errc::config_error, "analyze: 'thresholds' must be a list");
    for (const auto& tj : cfg["thresholds"]) {
      check_keys(tj, {"kind", "rho", "space", "grid"}, "threshold");
      std::string kind = opt_str(tj, "kind", "");
      std::string rho = opt_str(tj, "rho", kind == "r_dagger" ? "constant" : "identity");
      int grid = static_cast<int>(opt_int(tj, "grid", 512));
      ThresholdReport r;
      if (kind == "r_dagger") {
        KernelSpace space = opt_str(tj, "space", "normalized") == "original"
                                ? KernelSpace::original
                                : KernelSpace::normalized;
        r = r_dagger(*pair, parse_weight(rho), grid, 2048, space);
      } else if (kind == "r_star") {
        r = r_star(*pair, parse_shaping(rho, *pair), {}, grid);
      } else {
        fail(errc::config_error, "analyze: threshold kind must be r_dagger|r_star");
      }
      rep << "\n" << r.serialize();
    }
  }

  if (!cfg.contains("properties") || cfg["properties"].get<bool>()) {
    auto kernel = make_kernel(pair);
    auto fp = fixed_point_scan(*kernel, 2048, 1e-9);
    rep << "\nfixed_point_free " << (fp.fixed_point_free() ? "true" : "false") << "\n";
    for (double v : fp.fixed_points) rep << "fixed_point " << fmt(v) << "\n";
    if (pair->is_dmc()) {
      auto d = dmc_property_check(*kernel);
      rep << "b1 " << (d.b1 ? "true" : "false") << "\n"
          << "b2 " << (d.b2 ? "true" : "false") << "\n"
          << "b3_heuristic " << (d.b3_heuristic ? "true" : "false") << "\n"
          << "a3 " << (d.a3 ? "true" : "false") << "\n";
    }
  }
  return {"", rep.str()};
}

CommandResult cmd_mismatch(const json& cfg) {
  check_keys(cfg,
             {"command", "pair", "true_channel", "n", "trials", "seed", "precision", "threads",
              "burn", "keep", "out"},
             "mismatch");
  auto pair = build_pair(cfg.contains("pair") ? cfg["pair"] : json::object());
  if (!cfg.contains("true_channel")) fail(errc::config_error, "mismatch: missing 'true_channel'");
  auto truech = build_true_channel(cfg["true_channel"]);
  auto setup = make_mismatch_setup(pair, truech);
  int n = static_cast<int>(opt_int(cfg, "n", 5000));
  int trials = static_cast<int>(opt_int(cfg, "trials", 1));
  if (n < 1 || trials < 1) fail(errc::config_error, "mismatch: bad 'n' or 'trials'");
  std::uint64_t seed = static_cast<std::uint64_t>(opt_int(cfg, "seed", 0));

  std::ostringstream csv;
  csv << csv_header(cfg, "trial,n,exponent,error");
  double esum = 0.0;
  int ecount = 0;
  for (int i = 0; i < trials; ++i) {
    double e = std::nan("");
    std::string err;
    try {
      auto t = run_mismatch(setup, std::nullopt, n, seed, static_cast<std::uint64_t>(i));
      e = posterior_log_density_at_message(t);
      esum += e;
      ++ecount;
    } catch (const Error& ex) {
      err = sanitize(ex.what());
    }
    csv << i << "," << n << "," << fmt(e) << "," << err << "\n";
  }

  std::ostringstream rep;
  rep << "command mismatch\npair " << pair->label << "\ntrue_channel " << truech->label() << "\n";
  rep << "empirical_exponent " << fmt(ecount ? esum / ecount : std::nan("")) << "\n";

  // true-noise variance by quadrature; heavy tails leave it undefined
  double noise_var = std::nan("");
  if (truech->noise()) {
    auto noise = truech->noise();
    auto sup = noise->support();
    try {
      noise_var = integrate_adaptive(
                      [&](double x) {
                        double f = noise->density(x);
                        return f > 0 ? x * x * f : 0.0;
                      },
                      sup.lo, sup.hi, 1e-8, 1e-8)
                      .value;
    } catch (const Error&) {
    }
  }

  // analytic bound where the induced law is known: a Gaussian design rescales
  // its power to the designed snr, and a DMC design keeps its input pmf
  std::optional<MismatchBound> b;
  if (pair->kind == PairKind::awgn && truech->noise() && std::isfinite(noise_var)) {
    double pstar = pair->snr * noise_var;
    auto induced = truech->noise()->label().rfind("gaussian", 0) == 0
                       ? make_awgn_pair(pstar, noise_var)
                       : make_generic_pair(gaussian_dist(0.0, pstar), truech);
    b = mismatch_rate_bound(*pair, *induced);
  } else if (pair->is_dmc() && truech->is_dmc()) {
    b = mismatch_rate_bound(*pair, *make_dmc_pair(pair->input, truech));
  }
  if (b) {
    rep << "rate_bound " << fmt(b->bound_bits) << "\n"
        << "mi_star " << fmt(b->mi_star_bits) << "\n"
        << "penalty " << fmt(b->penalty_bits) << "\n"
        << "d_conditional " << fmt(b->d_conditional_bits) << "\n"
        << "d_output " << fmt(b->d_output_bits) << "\n";
  } else {
    rep << "rate_bound unavailable\n";
  }

  // input-power / stability diagnostics from the double-precision chain
  if (!pair->is_dmc() && truech->noise()) {
    int burn = static_cast<int>(opt_int(cfg, "burn", 2000));
    int keep = static_cast<int>(opt_int(cfg, "keep", 20000));
    auto xs = induced_input_chain(setup, burn, keep, seed + 1);
    double m2 = 0.0;
    for (double x : xs) m2 += x * x;
    double power = m2 / xs.size();
    rep << "induced_power " << fmt(power) << "\n";
    if (std::isfinite(noise_var)) {
      rep << "noise_variance " << fmt(noise_var) << "\n";
      rep << "snr_star " << fmt(power / noise_var) << "\n";
    }
    int kkeep = std::min(keep / 8, 1000);
    if (kkeep >= 100) {
      double d = induced_input_stability(setup, burn, kkeep, seed + 2, 8);
      rep << "stability_ks " << fmt(d) << "\n"
          << "stability_ks_critical "
          << fmt(ks_two_sample_critical(static_cast<size_t>(kkeep), static_cast<size_t>(kkeep),
                                        0.01))
          << "\n";
    }
  }
  return {csv.str(), rep.str()};
}

}  // namespace

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::config_error, "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::config_error, std::string("config parse error: ") + e.what());
  }
  return j;
}

CommandResult run_command(const json& cfg) {
  require_object(cfg, "config");
  std::string cmd = opt_str(cfg, "command", "");
  if (cmd == "simulate") return cmd_simulate(cfg);
  if (cmd == "sweep") return cmd_sweep(cfg);
  if (cmd == "analyze") return cmd_analyze(cfg);
  if (cmd == "mismatch") return cmd_mismatch(cfg);
  fail(errc::config_error, "unknown command '" + cmd + "'");
}

}  // namespace pm::cli
