#include <benchmark/benchmark.h>

#include "pm/analysis.hpp"
#include "pm/mismatch.hpp"
#include "pm/simulate.hpp"

using namespace pm;

namespace {

PairPtr pair_for(const std::string& kind) {
  if (kind == "awgn") return make_awgn_pair(3.0, 1.0);
  if (kind == "bsc") return make_bsc_pair(0.2);
  if (kind == "uniform") return make_uniform_pair();
  if (kind == "exponential") return make_exponential_pair();
  return make_exp_mean_pair(1.0, 1.0);
}

void BM_forward_norm(benchmark::State& state, const std::string& kind) {
  auto pair = pair_for(kind);
  auto kernel = make_kernel(pair);
  UnitValue th(0.3, 128), ph(0.6, 128);
  for (auto _ : state) benchmark::DoNotOptimize(kernel->forward_norm(th, ph));
}

void BM_session(benchmark::State& state, const std::string& kind) {
  auto pair = pair_for(kind);
  int n = static_cast<int>(state.range(0));
  std::uint64_t stream = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_session(pair, std::nullopt, std::nullopt, n, 1, stream++));
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_decode_fixed(benchmark::State& state) {
  auto pair = make_awgn_pair(3.0, 1.0);
  SessionOptions opt;
  opt.target_rate = 0.9;
  auto t = run_session(pair, std::nullopt, std::nullopt, 20, 1, 0, opt);
  for (auto _ : state) benchmark::DoNotOptimize(decode_fixed_rate(t, 0.9));
}

void BM_decode_variable(benchmark::State& state) {
  auto pair = make_bsc_pair(0.2);
  int n = static_cast<int>(state.range(0));
  SessionOptions opt;
  opt.target_rate = pair->mi_bits;
  auto t = run_session(pair, std::nullopt, std::nullopt, n, 1, 0, opt);
  for (auto _ : state) benchmark::DoNotOptimize(decode_variable_rate(t, 1e-3, 32));
}

void BM_decode_rollback(benchmark::State& state) {
  auto pair = make_bsc_pair(0.2);
  int n = static_cast<int>(state.range(0));
  SessionOptions opt;
  opt.target_rate = pair->mi_bits;
  auto t = run_session(pair, std::nullopt, std::nullopt, n, 1, 0, opt);
  for (auto _ : state) benchmark::DoNotOptimize(decode_rollback(t, 1e-3, 0.5));
}

void BM_posterior_exponent(benchmark::State& state) {
  auto pair = make_bsc_pair(0.2);
  auto t = run_session(pair, std::nullopt, std::nullopt, 2000, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(posterior_log_density_at_message(t));
}

void BM_r_dagger_bsc(benchmark::State& state) {
  auto pair = make_bsc_pair(0.2);
  auto w = constant_weight();
  for (auto _ : state) benchmark::DoNotOptimize(r_dagger(*pair, w, 128, 256));
}

void BM_r_star_uniform(benchmark::State& state) {
  auto pair = make_uniform_pair();
  auto rho = identity_shaping(*pair);
  for (auto _ : state) benchmark::DoNotOptimize(r_star(*pair, rho, {}, 128, 128));
}

void BM_induced_chain(benchmark::State& state) {
  auto awgn = make_awgn_pair(3.0, 1.0);
  auto setup = make_mismatch_setup(
      awgn, additive_channel(laplace_dist(0.0, 0.7071067811865476), "laplace_add"));
  for (auto _ : state)
    benchmark::DoNotOptimize(induced_input_chain(setup, 100, 1000, state.iterations()));
  state.SetItemsProcessed(state.iterations() * 1000);
}

}  // namespace

BENCHMARK_CAPTURE(BM_forward_norm, awgn, "awgn");
BENCHMARK_CAPTURE(BM_forward_norm, bsc, "bsc");
BENCHMARK_CAPTURE(BM_forward_norm, uniform, "uniform");
BENCHMARK_CAPTURE(BM_forward_norm, exp_mean, "exp_mean");
BENCHMARK_CAPTURE(BM_session, bsc, "bsc")->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_session, awgn, "awgn")->Arg(100);
BENCHMARK_CAPTURE(BM_session, uniform, "uniform")->Arg(100)->Arg(1000);
BENCHMARK(BM_decode_fixed);
BENCHMARK(BM_decode_variable)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decode_rollback)->Arg(200)->Arg(1000);
BENCHMARK(BM_posterior_exponent);
BENCHMARK(BM_r_dagger_bsc)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_r_star_uniform)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_induced_chain)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
