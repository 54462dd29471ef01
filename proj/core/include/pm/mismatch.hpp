#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "pm/simulate.hpp"

namespace pm {

// A scheme designed for one input/channel pair, driven over a different true
// channel. induced_input is the stationary input law under mismatch when
// known; diagnostics fall back to an empirical burn-in chain otherwise.
struct MismatchSetup {
  PairPtr design;
  ChannelPtr true_channel;
  DistPtr induced_input;
};

// Sample-checks that design-side output normalization can digest the true
// channel's outputs (8x8 quantile grid); DMC setups must agree on alphabet
// sizes, and the channel mechanics (discrete vs additive) must match.
MismatchSetup make_mismatch_setup(PairPtr design, ChannelPtr true_channel,
                                  DistPtr induced_input = nullptr);

// run_session with the output draw redirected to the true channel; kernel,
// normalization and recorded state stay on the design model. With the true
// channel equal to the design channel this is bit-exact run_session. An
// output outside the design support aborts with OutOfSupport at its step.
Transcript run_mismatch(const MismatchSetup& setup, const std::optional<UnitValue>& theta0, int n,
                        std::uint64_t seed, std::uint64_t stream_id,
                        const SessionOptions& opt = {});

struct MismatchBound {
  double bound_bits = 0.0;          // mi_star - penalty
  double mi_star_bits = 0.0;        // I(X*;Y*)
  double penalty_bits = 0.0;        // d_conditional - d_output, >= 0 by convexity
  double d_conditional_bits = 0.0;  // D(P_{Y*|X*} || P_{Y|X} | P_{X*})
  double d_output_bits = 0.0;       // D(P_{Y*} || P_Y)
};

// Achievable-rate bound for the mismatched scheme; `induced` is the pair
// (P_{X*}, P_{Y*|X*}). A penalty below -tol is reported as a numerical
// failure; a divergent divergence integral raises InfinitePenalty.
MismatchBound mismatch_rate_bound(const InputChannelPair& design, const InputChannelPair& induced,
                                  double tol = 1e-6);

// Monte Carlo average over trials (stream ids 0..trials-1) of the design-
// model posterior log-density exponent along mismatch transcripts; estimates
// the achievable mismatch rate in bits per symbol.
double empirical_mismatch_exponent(const MismatchSetup& setup, int n, int trials,
                                   std::uint64_t seed);

// D(P || Q) in bits by quadrature (continuous or purely discrete pairs).
// P-mass where Q vanishes raises InfinitePenalty.
double kl_divergence(const ScalarDistribution& p, const ScalarDistribution& q, double tol = 1e-9);

// Closed form for zero-mean U against a zero-mean Gaussian V:
// h(V) - h(U) + (log2 e / 2)(E U^2 / E V^2 - 1), in bits.
double divergence_vs_gaussian(const ScalarDistribution& u, double gaussian_variance);

// Double-precision design-kernel chain over the true channel: burn-in, then
// `keep` samples thinned by `thin`. Continuous designs only.
std::vector<double> induced_input_chain(const MismatchSetup& setup, int burn, int keep,
                                        std::uint64_t seed, int thin = 1);

// KS distance between two independently seeded burn-in chains; a stability
// diagnostic for the empirical induced input (no convergence certificate).
double induced_input_stability(const MismatchSetup& setup, int burn, int keep, std::uint64_t seed,
                               int thin = 1);

}  // namespace pm
