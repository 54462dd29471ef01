#pragma once
#include <functional>
#include <string>
#include <vector>

#include "pm/channel.hpp"

namespace pm {

// Weight role: continuous rho: (0,1) -> [1, inf), used by the weighted
// contraction threshold in normalized space.
struct WeightFunction {
  std::function<double(double)> rho;
  std::string label;
};
WeightFunction constant_weight();
// min(s, 1-s)^{-beta}: >= 1, continuous, symmetric about 1/2.
WeightFunction symmetric_power_weight(double beta);

// Shaping role: differentiable, strictly monotone map of the interior input
// support. The catalog admits either orientation (s^{-beta} is decreasing);
// the Lipschitz analysis is orientation-free.
struct ShapingFunction {
  std::function<double(double)> rho, inv, deriv;
  double lo = 0.0, hi = 1.0;  // domain (interior input support)
  std::string label;
};
ShapingFunction identity_shaping(const InputChannelPair& pair);
ShapingFunction power_shaping(double beta);  // s^{-beta} on (0, inf)
inline ShapingFunction sqrt_inv_shaping() { return power_shaping(0.5); }

// Grid checks: strict monotonicity, inv o rho = id to 1e-12, bounded density
// of rho(X). Throws ConfigError on violation.
void validate_shaping(const ShapingFunction& rho, const InputChannelPair& pair);

struct ThresholdReport {
  std::string kind;  // r_dagger | r_star | r_star_separable
  std::string rho_label;
  double value_bits = 0.0;
  bool finite = true;   // false: the defining expectation/sup diverges
  double argmax_s = 0.0;  // extremal certificate
  double argmax_t = 0.0;  // second coordinate for (s,t) searches
  std::vector<double> q_schedule, q_values;
  bool monotone_ok = true;  // Jensen diagnostic on q -> value
  int grid = 0;
  std::string serialize() const;  // key-value text block
};

double lipschitz_global(const std::function<double(double)>& f, double s, double t);
// limsup_{t->s} |f(s)-f(t)|/|s-t| by symmetric difference with adaptive step.
double lipschitz_local(const std::function<double(double)>& f, double s);

// Double-precision inverse kernels driving the RIFS analysis.
// normalized: omega_phi(s) = F_{Theta|Phi}^{-1}(s|phi) on (0,1).
// original:   omega_y(x) = F_{X|Y}^{-1}(F_X(x)|y) on the input support.
double omega_normalized(const InputChannelPair& pair, double s, double phi);
double omega_original(const InputChannelPair& pair, double x, double y);

enum class KernelSpace { normalized, original };

// -log2 sup_s E[rho(omega(s))/rho(s) * D_s(omega)], expectation over the
// uniform control (normalized) or the output law (original). An unbounded
// sup toward the domain boundary is reported as finite=false.
ThresholdReport r_dagger(const InputChannelPair& pair, const WeightFunction& rho,
                         int s_grid = 512, int quad_nodes = 2048,
                         KernelSpace space = KernelSpace::normalized);

std::vector<double> default_q_schedule();  // 1, 1/2, ..., 2^-8

// lim_{q->0+} inf_{s!=t} -q^{-1} log2 E[D_{s,t}(rho o omega_Y o rho^{-1})^q],
// approximated by the last (smallest) schedule entry; a truncated limit is a
// lower bound since the q-sequence is nonincreasing in q.
ThresholdReport r_star(const InputChannelPair& pair, const ShapingFunction& rho,
                       std::vector<double> q_schedule = {}, int grid = 512,
                       int quad_nodes = 512);

// Closed form when rho o omega_y o rho^{-1}(s) = u(s) v(y) + q(y):
// -E log2|v(Y)| - log2 sup_s |u'(s)|. The identity is verified on a 32x32
// (s,y) grid to 1e-9 first; failure raises NotSeparable.
ThresholdReport r_star_separable(const InputChannelPair& pair, const ShapingFunction& rho,
                                 const std::function<double(double)>& u,
                                 const std::function<double(double)>& v);

// 1 - sup_x P((x, x+ell)); grid over quantiles plus golden refinement.
double tail_function(const ScalarDistribution& dist, double ell);

// Law of rho(X) for a shaped input (cdf/density/quantile by transform).
DistPtr shape_distribution(DistPtr base, const ShapingFunction& rho);

// delta_n = T_{rho(X)}(2^{n (value - R)(1 - margin)}); margin fixes the
// little-o. R at or above the threshold is a hard error.
double target_error_schedule(double rate, const ThresholdReport& report,
                             const ScalarDistribution& shaped_dist, int n, double margin = 0.1);

// (K_s + K_t)/(1-r) + 2 J(s;t) with J(s;t) = sup rho over conv{s,t} and
// K_s = E[J(s; omega_Phi(s))]. Diagnostic only; +inf when r >= 1.
double psi_diagnostic(const InputChannelPair& pair, const WeightFunction& rho, double s, double t,
                      double r, int quad_nodes = 1024);

}  // namespace pm
