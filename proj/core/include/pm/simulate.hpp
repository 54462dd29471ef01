#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pm/kernel.hpp"

namespace pm {

// Precision sizing for a session. When a target rate is given the working
// precision is raised so the decoded interval (width ~2^{-nR}) stays
// resolvable: prec >= 2(nR + 64). An explicitly pinned precision that cannot
// resolve the horizon (nR > prec/2 - 32) is a hard error, never silent loss.
struct SessionOptions {
  long precision = 128;
  std::optional<double> target_rate;
  bool explicit_precision = false;
};

long session_precision(int n, const SessionOptions& opt);

// One transmission session: the message point, the aligned input/output
// sequences in both coordinate systems, and everything needed to replay it.
// thetas holds Theta_1..Theta_{n+1} (thetas[0] is theta0, or mu(theta0) for a
// mu-variant); xs, ys, phis, lams hold the n per-step records.
struct Transcript {
  PairPtr pair;
  KernelPtr kernel;
  std::optional<Upf> mu;
  UnitValue theta0;
  int n = 0;
  long precision = 128;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::vector<Real> xs, ys;
  std::vector<UnitValue> thetas, phis, lams;
};

Transcript run_session(PairPtr pair, std::optional<Upf> mu, const std::optional<UnitValue>& theta0,
                       int n, std::uint64_t seed, std::uint64_t stream_id,
                       const SessionOptions& opt = {});

// Posterior cdf of the message point after k-1 outputs, by forward kernel
// composition along the transcript: G_1 = id, G_{k+1} = F(.|phi_k) o G_k.
// For a mu-variant this is the cdf of Theta_0 itself (the inner conditional
// cdf chain), so thetas[k-1] = mu(posterior_cdf(t, theta0, k)).
UnitValue posterior_cdf(const Transcript& t, const UnitValue& theta, int k);

// G_k^{-1}(s) by reverse composition of the closed-form inverse kernels
// omega_phi (bisection on the monotone G_k for mu-variants). prec 0 means the
// transcript's working precision.
UnitValue posterior_inv(const Transcript& t, const UnitValue& s, int k, long prec = 0);

// (1/n) sum log2 f_{Phi|Theta}(phi_k|theta_k); converges to I(X;Y).
double posterior_log_density_at_message(const Transcript& t);

enum class DecoderKind { fixed_rate, variable_rate_posterior, variable_rate_rollback };

struct DecodedInterval {
  UnitValue lo, hi;           // open interval (lo, hi) in (0,1)
  double rate = 0.0;          // -(1/n) log2 (hi - lo), rounded once at the end
  bool contains_message = false;
  DecoderKind decoder = DecoderKind::fixed_rate;
  double delta = 0.0;
  double target_rate = 0.0;
  double alpha = 0.0;
};

// Max-posterior-mass interval of length 2^{-nR}: 1024-cell grid plus
// golden-section refinement, leftmost tie-break.
DecodedInterval decode_fixed_rate(const Transcript& t, double rate);

// Minimal-length interval of posterior mass >= 1-delta, searched over the
// left trim t in [0, delta] in quantile space (grid + refinement, leftmost
// tie-break). The search runs at reduced precision; the winning endpoints are
// recomputed at the transcript's working precision.
DecodedInterval decode_variable_rate(const Transcript& t, double delta, int grid = 256);

// Rolls the fixed quantile pair ((1-alpha)delta, 1-alpha*delta) back through
// the reverse IFS; posterior mass is exactly 1-delta by construction.
DecodedInterval decode_rollback(const Transcript& t, double delta, double alpha);

// delta-trajectories bracketing the message point: neg[k] <= thetas[k] <=
// pos[k], images of theta0 -+ min(delta, .) under G_k.
struct TrajectoryPair {
  double delta = 0.0;
  std::vector<UnitValue> neg, pos;
};
TrajectoryPair trajectories(const Transcript& t, double delta);

// Line-oriented text serialization; decimal strings round-trip bit-exactly.
// Parsing takes the pair (checked against the recorded label) because the
// transcript only stores the label, not the full channel description.
std::string serialize_transcript(const Transcript& t);
Transcript parse_transcript(const std::string& text, PairPtr pair);

}  // namespace pm
