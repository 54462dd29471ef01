#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "pm/error.hpp"

using nlohmann::json;
using pm::Error;

namespace {

int exit_code(const std::string& cmdline) {
  int r = std::system((cmdline + " >/dev/null 2>&1").c_str());
  return (r >> 8) & 0xff;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::string strip_elapsed(const std::string& csv) {
  // elapsed_ms is the only wall-clock column; blank it for comparisons
  std::istringstream is(csv);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#') {
      std::vector<std::string> cells;
      size_t start = 0;
      for (;;) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
          cells.push_back(line.substr(start));
          break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
      if (cells.size() == 10 && cells[0] != "trial") cells[8] = "-";
      line.clear();
      for (size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    }
    os << line << "\n";
  }
  return os.str();
}

double report_value(const std::string& report, const std::string& key) {
  std::istringstream is(report);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(key.size() + 1));
  FAIL("missing report key ", key);
  return 0.0;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(pm::cli::run_command(json{{"command", "warp"}}), Error);
  CHECK_THROWS_AS(pm::cli::run_command(json::parse(R"({"command":"simulate","pair":{"kind":"bsc","p":0.2},"n":10,"trials":0})")), Error);
  // unknown keys are rejected at both levels
  CHECK_THROWS_AS(pm::cli::run_command(json::parse(R"({"command":"simulate","pair":{"kind":"bsc","p":0.2},"n":10,"trials":1,"bogus":1})")), Error);
  CHECK_THROWS_AS(pm::cli::run_command(json::parse(R"({"command":"simulate","pair":{"kind":"bsc","p":0.2,"zap":3},"n":10,"trials":1})")), Error);
  // sweep with an empty grid
  CHECK_THROWS_AS(pm::cli::run_command(json::parse(R"({"command":"sweep","pair":{"kind":"bsc","p":0.2},"n":[],"delta":[0.01],"trials":2})")), Error);
  // mismatch without a true channel
  CHECK_THROWS_AS(pm::cli::run_command(json::parse(R"({"command":"mismatch","pair":{"kind":"awgn"}})")), Error);
  // fixed decoder needs a rate
  CHECK_THROWS_AS(pm::cli::run_command(json::parse(R"({"command":"simulate","pair":{"kind":"bsc","p":0.2},"n":10,"decoder":"fixed","trials":1})")), Error);
}

TEST_CASE("simulate: zero-error uniform rows") {
  auto cfg = json::parse(
      R"({"command":"simulate","pair":{"kind":"uniform"},"n":200,"decoder":"variable","delta":0,"trials":20,"seed":3})");
  auto res = pm::cli::run_command(cfg);
  auto rows = data_lines(res.csv);
  REQUIRE(rows.size() == 21);  // header + 20 trials
  CHECK(rows[0] == "trial,n,param,lo,hi,rate,hit,exponent,elapsed_ms,error");
  for (size_t i = 1; i < rows.size(); ++i) {
    std::istringstream ls(rows[i]);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    CHECK(cells[6] == "1");  // hit flag
  }
  CHECK(res.csv.rfind("# pm-csv v1\n", 0) == 0);
  CHECK(report_value(res.report, "p_e") == 0.0);
  CHECK(report_value(res.report, "mean_rate") == doctest::Approx(0.7213).epsilon(0.1));
}

TEST_CASE("simulate: deterministic across thread counts") {
  auto base = json::parse(
      R"({"command":"simulate","pair":{"kind":"bsc","p":0.2},"n":60,"decoder":"variable","delta":0.01,"trials":12,"seed":9})");
  auto one = base;
  one["threads"] = 1;
  auto four = base;
  four["threads"] = 4;
  auto r1 = pm::cli::run_command(one);
  auto r4 = pm::cli::run_command(four);
  CHECK(strip_elapsed(r1.csv) == strip_elapsed(r4.csv));
  CHECK(r1.report == r4.report);
}

TEST_CASE("simulate: per-trial errors are recorded, not fatal") {
  // pinned precision too small for the horizon: every trial aborts cleanly
  auto cfg = json::parse(
      R"({"command":"simulate","pair":{"kind":"bsc","p":0.2},"n":200,"decoder":"fixed","rate":0.5,"precision":128,"trials":4,"seed":1})");
  auto res = pm::cli::run_command(cfg);
  auto rows = data_lines(res.csv);
  REQUIRE(rows.size() == 5);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].find("PrecisionExhausted") != std::string::npos);
  CHECK(report_value(res.report, "failures") == 4.0);
}

TEST_CASE("sweep grid") {
  auto cfg = json::parse(
      R"({"command":"sweep","pair":{"kind":"bsc","p":0.2},"n":[60,120],"decoder":"fixed","rate":[0.1,0.2],"trials":6,"seed":4})");
  auto res = pm::cli::run_command(cfg);
  auto rows = data_lines(res.csv);
  REQUIRE(rows.size() == 5);  // header + 4 cells
  CHECK(rows[0] ==
        "n,param,trials,misses,failures,p_e,wilson_lo,wilson_hi,mean_rate,mean_exponent");
}

TEST_CASE("analyze report") {
  auto cfg = json::parse(
      R"({"command":"analyze","pair":{"kind":"uniform"},"thresholds":[{"kind":"r_star","rho":"identity","grid":128}]})");
  auto res = pm::cli::run_command(cfg);
  CHECK(res.report.find("kind r_star") != std::string::npos);
  CHECK(report_value(res.report, "value_bits") == doctest::Approx(0.7213).epsilon(0.03));
  CHECK(res.report.find("fixed_point_free true") != std::string::npos);

  auto bcfg = json::parse(R"({"command":"analyze","pair":{"kind":"bsc","p":0.2}})");
  auto bres = pm::cli::run_command(bcfg);
  CHECK(bres.report.find("b1 true") != std::string::npos);
  CHECK(bres.report.find("a3 true") != std::string::npos);
}

TEST_CASE("mismatch command") {
  auto cfg = json::parse(
      R"({"command":"mismatch","pair":{"kind":"awgn","power":3,"noise":1},"true_channel":{"kind":"laplace","variance":1},"n":800,"trials":2,"seed":5,"keep":8000})");
  auto res = pm::cli::run_command(cfg);
  CHECK(report_value(res.report, "rate_bound") == doctest::Approx(1.0).epsilon(0.01));
  CHECK(report_value(res.report, "penalty") > 0.05);
  CHECK(report_value(res.report, "snr_star") == doctest::Approx(3.0).epsilon(0.1));
  CHECK(report_value(res.report, "empirical_exponent") == doctest::Approx(1.0).epsilon(0.15));
  CHECK(data_lines(res.csv).size() == 3);

  // no-mismatch control: penalty vanishes
  auto ctrl = json::parse(
      R"({"command":"mismatch","pair":{"kind":"awgn","power":3,"noise":1},"true_channel":{"kind":"gaussian","variance":1},"n":50,"trials":1,"seed":5,"keep":2000})");
  auto cres = pm::cli::run_command(ctrl);
  CHECK(std::abs(report_value(cres.report, "penalty")) < 1e-6);
  CHECK(report_value(cres.report, "rate_bound") == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("binary exit codes") {
  std::string bin = PM_BIN;
  CHECK(exit_code(bin + " simulate --channel uniform --n 50 --delta 0 --trials 2 --seed 1 --out /tmp/pm_cli_t1.csv") == 0);
  std::ifstream f("/tmp/pm_cli_t1.csv");
  CHECK(f.good());
  CHECK(exit_code(bin + " simulate --channel uniform --n 50 --trials 0") == 2);
  CHECK(exit_code(bin + " simulate --channel warp --n 50 --trials 1") == 2);
  CHECK(exit_code(bin + " frobnicate") != 0);
}
