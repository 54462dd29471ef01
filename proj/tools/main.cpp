#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "cli.hpp"
#include "pm/error.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config, out, channel, decoder, true_kind;
  double p = 0, power = 3, noise = 1, eps = 0, a = 1, b = 1;
  double rate = 0, delta = 0, alpha = 0, true_variance = 0, true_scale = 0, true_p = 0;
  std::vector<double> ns, rates, deltas;
  long trials = 0, seed = 0, precision = 0, threads = 0;
  std::vector<std::string> thresholds;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--out", f.out, "output path for the CSV/report artifact");
  cmd->add_option("--channel", f.channel, "pair kind: awgn|bsc|bec|uniform|exponential|exp_mean");
  cmd->add_option("--p", f.p, "bsc crossover");
  cmd->add_option("--power", f.power, "awgn input power");
  cmd->add_option("--noise", f.noise, "awgn noise variance");
  cmd->add_option("--eps", f.eps, "bec erasure probability");
  cmd->add_option("--a", f.a, "exp_mean parameter a");
  cmd->add_option("--b", f.b, "exp_mean parameter b");
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--precision", f.precision, "pinned working precision in bits");
  cmd->add_option("--threads", f.threads, "worker threads for trial fan-out");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials");
}

long cnt(const CLI::App* cmd, const std::string& name) {
  const auto* o = cmd->get_option_no_throw(name);
  return o ? static_cast<long>(o->count()) : 0;
}

json pair_json(const CLI::App* cmd, const Flags& f) {
  json p;
  p["kind"] = f.channel;
  if (cnt(cmd, "--p")) p["p"] = f.p;
  if (cnt(cmd, "--power")) p["power"] = f.power;
  if (cnt(cmd, "--noise")) p["noise"] = f.noise;
  if (cnt(cmd, "--eps")) p["eps"] = f.eps;
  if (cnt(cmd, "--a")) p["a"] = f.a;
  if (cnt(cmd, "--b")) p["b"] = f.b;
  return p;
}

int run(const json& cfg, const std::string& out) {
  auto res = pm::cli::run_command(cfg);
  if (!res.csv.empty()) {
    std::string path = out.empty() ? (cfg.contains("out") ? cfg["out"].get<std::string>() : "")
                                   : out;
    if (path.empty()) {
      std::cout << res.csv;
    } else {
      std::ofstream os(path);
      if (!os) pm::fail(pm::errc::config_error, "cannot write " + path);
      os << res.csv;
    }
  } else if (!out.empty()) {
    std::ofstream os(out);
    if (!os) pm::fail(pm::errc::config_error, "cannot write " + out);
    os << res.report;
  }
  std::cout << res.report;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posterior-matching experiment harness"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "per-trial sessions with decoding");
  add_common(sim, f);
  sim->add_option("--n", f.ns, "horizon");
  sim->add_option("--decoder", f.decoder, "fixed|variable|rollback");
  sim->add_option("--rate", f.rates, "fixed decoding rate");
  sim->add_option("--delta", f.deltas, "variable-rate target error");
  sim->add_option("--alpha", f.alpha, "rollback split");

  auto* sw = app.add_subcommand("sweep", "aggregate grid over n and rate/delta");
  add_common(sw, f);
  sw->add_option("--n", f.ns, "horizon list");
  sw->add_option("--decoder", f.decoder, "fixed|variable|rollback");
  sw->add_option("--rate", f.rates, "rate list");
  sw->add_option("--delta", f.deltas, "delta list");
  sw->add_option("--alpha", f.alpha, "rollback split");

  auto* an = app.add_subcommand("analyze", "thresholds and property checks");
  add_common(an, f);
  an->add_option("--threshold", f.thresholds, "kind:rho, e.g. r_star:identity, r_dagger:constant");

  auto* mis = app.add_subcommand("mismatch", "scheme over a different true channel");
  add_common(mis, f);
  mis->add_option("--n", f.ns, "horizon");
  mis->add_option("--true-channel", f.true_kind, "gaussian|laplace|cauchy|bsc|bec");
  mis->add_option("--true-variance", f.true_variance, "true additive-noise variance");
  mis->add_option("--true-scale", f.true_scale, "true cauchy scale");
  mis->add_option("--true-p", f.true_p, "true bsc crossover");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* cmd = app.get_subcommands().front();
    json cfg = f.config.empty() ? json::object() : pm::cli::load_config_file(f.config);
    cfg["command"] = cmd->get_name();
    if (cnt(cmd, "--channel")) cfg["pair"] = pair_json(cmd, f);
    if (cnt(cmd, "--n")) {
      if (cmd->get_name() == "sweep")
        cfg["n"] = f.ns;
      else if (!f.ns.empty())
        cfg["n"] = static_cast<long>(f.ns.front());
    }
    if (cnt(cmd, "--decoder")) cfg["decoder"] = f.decoder;
    if (cnt(cmd, "--rate")) {
      if (cmd->get_name() == "sweep")
        cfg["rate"] = f.rates;
      else if (!f.rates.empty())
        cfg["rate"] = f.rates.front();
    }
    if (cnt(cmd, "--delta")) {
      if (cmd->get_name() == "sweep")
        cfg["delta"] = f.deltas;
      else if (!f.deltas.empty())
        cfg["delta"] = f.deltas.front();
    }
    if (cnt(cmd, "--alpha")) cfg["alpha"] = f.alpha;
    if (cnt(cmd, "--trials")) cfg["trials"] = f.trials;
    if (cnt(cmd, "--seed")) cfg["seed"] = f.seed;
    if (cnt(cmd, "--precision")) cfg["precision"] = f.precision;
    if (cnt(cmd, "--threads")) cfg["threads"] = f.threads;
    if (cnt(cmd, "--threshold")) {
      json ts = json::array();
      for (const auto& t : f.thresholds) {
        auto colon = t.find(':');
        json tj;
        tj["kind"] = t.substr(0, colon);
        if (colon != std::string::npos) tj["rho"] = t.substr(colon + 1);
        ts.push_back(tj);
      }
      cfg["thresholds"] = ts;
    }
    if (cnt(cmd, "--true-channel")) {
      json tc;
      tc["kind"] = f.true_kind;
      if (cnt(cmd, "--true-variance")) tc["variance"] = f.true_variance;
      if (cnt(cmd, "--true-scale")) tc["scale"] = f.true_scale;
      if (cnt(cmd, "--true-p")) tc["p"] = f.true_p;
      cfg["true_channel"] = tc;
    }
    return run(cfg, f.out);
  } catch (const pm::Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == pm::errc::config_error ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}
