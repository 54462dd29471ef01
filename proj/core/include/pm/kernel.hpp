#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pm/channel.hpp"
#include "pm/real.hpp"

namespace pm {

// Uniformity-preserving bijection of (0,1): a slope-1 shuffle of the cells
// delimited by `breaks` (0=b0<...<bm=1), cell i translated to the position it
// occupies after reordering by perm (perm[j] = source cell placed j-th).
// Piecewise translations preserve Lebesgue measure, hence uniformity, and
// admit an explicit inverse and explicit preimage/image interval algebra.
class Upf {
 public:
  Upf(std::string label, std::vector<double> breaks, std::vector<size_t> perm);

  UnitValue map(const UnitValue& t) const;
  UnitValue inv(const UnitValue& t) const;
  // mu((0,v]) as ordered disjoint intervals (a,b], a<b.
  std::vector<std::pair<double, double>> image_of_prefix(double v) const;
  std::vector<std::pair<Real, Real>> image_of_prefix_r(const Real& v) const;
  const std::string& label() const { return label_; }
  bool is_identity() const;
  size_t cells() const { return perm_.size(); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<size_t>& perm() const { return perm_; }

 private:
  std::string label_;
  std::vector<double> breaks_;   // source cell boundaries
  std::vector<size_t> perm_;    // perm[j] = source cell at destination slot j
  std::vector<double> dstart_;  // destination start of each source cell
  std::vector<double> dbreaks_;  // destination cell boundaries
};

Upf identity_upf();
// theta+1/3 on (0,1/3], theta-1/3 on (1/3,2/3], identity on (2/3,1).
Upf three_piece_shift_upf();
Upf permutation_upf(std::vector<double> breaks, std::vector<size_t> perm);
// Cells are the canonical input atoms of a discrete-input pair.
Upf input_permutation_upf(const InputChannelPair& pair, std::vector<size_t> perm);

// The matching recursion in both coordinate systems. Immutable, evaluation is
// pure. forward_xy realizes x' = F_X^{-1}(F_{X|Y}(x|y)); forward_norm the
// quantile-space transition theta' = F_{Theta|Phi}(theta|phi); inverse_norm
// the inverse branch omega_phi used by interval rollback.
class MatchingKernel {
 public:
  explicit MatchingKernel(PairPtr pair);

  const InputChannelPair& pair() const { return *pair_; }
  PairPtr pair_ptr() const { return pair_; }
  bool closed_form() const { return closed_; }

  double forward_xy(double x, double y) const;
  UnitValue forward_norm(const UnitValue& theta, const UnitValue& phi) const;
  UnitValue inverse_norm(const UnitValue& s, const UnitValue& phi) const;

  // DMC helpers: output branch index for a normalized output value.
  size_t branch_of(const UnitValue& phi) const;

 private:
  UnitValue forward_dmc(const UnitValue& theta, const UnitValue& phi) const;
  UnitValue inverse_dmc(const UnitValue& s, const UnitValue& phi) const;

  PairPtr pair_;
  bool closed_ = true;
  std::vector<std::vector<double>> post_cum_;  // DMC: cumulative posterior per y
};

using KernelPtr = std::shared_ptr<const MatchingKernel>;
KernelPtr make_kernel(PairPtr pair);

// Module operations (free-function forms).
double kernel_eval(const InputChannelPair& pair, double x, double y);
UnitValue normalized_kernel_eval(const InputChannelPair& pair, const UnitValue& theta, const UnitValue& phi);
UnitValue normalize_output(const InputChannelPair& pair, double y, const UnitValue& lam);
Real normalize_output_r(const InputChannelPair& pair, const Real& y, const UnitValue& lam);
UnitValue mu_variant_kernel(const MatchingKernel& kernel, const Upf& mu, const UnitValue& theta,
                            const UnitValue& phi);
// The conditional cdf F_{mu^{-1}(Theta)|Phi}(v|phi) inside the mu-variant
// kernel; monotone in v with E_Phi[.] = v (the full variant map is not).
UnitValue mu_inner_cdf(const MatchingKernel& kernel, const Upf& mu, const UnitValue& v,
                       const UnitValue& phi);

}  // namespace pm
