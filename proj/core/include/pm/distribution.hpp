#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pm/real.hpp"
#include "pm/rng.hpp"

namespace pm {

struct Atom {
  double x;
  double mass;
};

struct SupportInterval {
  double lo;
  double hi;  // ±infinity allowed
};

// A scalar probability law: continuous, discrete, or a mixture with finitely
// many atoms. The inverse c.d.f. follows the right-continuous convention
// inv(t) = inf{x : F(x) > t}. Closed-form laws also expose extended-precision
// cdf / inverse-cdf used by the quantile-space recursions.
class ScalarDistribution {
 public:
  enum class Kind { continuous, discrete, mixed };

  virtual ~ScalarDistribution() = default;
  virtual Kind kind() const = 0;
  virtual std::string label() const = 0;
  virtual SupportInterval support() const = 0;
  virtual const std::vector<Atom>& atoms() const;
  virtual double cdf(double x) const = 0;
  virtual double inv_cdf(double t) const;  // numeric fallback on cdf
  // pdf on the continuous part; pmf at atoms.
  virtual double density(double x) const = 0;
  double atom_mass(double x) const;
  virtual double mean() const;

  virtual bool has_extended() const { return false; }
  virtual Real cdf_r(const Real& x) const;      // default lifts the double path
  virtual Real inv_cdf_r(const Real& t) const;  // default: bisection on cdf_r

  // Grid-backed laws precompute their differential entropy; NaN means
  // "integrate the density instead".
  virtual double entropy_hint_bits() const;

  bool in_support(double x) const;
};

using DistPtr = std::shared_ptr<const ScalarDistribution>;

DistPtr uniform_dist(double a, double b);
DistPtr gaussian_dist(double mean, double variance);
DistPtr exponential_dist(double rate);
DistPtr laplace_dist(double mean, double scale);
DistPtr cauchy_dist(double loc, double scale);
// pmf over arbitrary real locations (ascending); Bernoulli(1/2) = {0,1}.
DistPtr discrete_dist(std::vector<double> values, std::vector<double> probs);
DistPtr bernoulli_dist(double p1);
// Atom of mass b/(a+b) at zero plus an exponential tail of mean a+b scaled by
// a/(a+b): the capacity-achieving input under a mean constraint over additive
// exponential noise.
DistPtr mixed_exponential_dist(double a, double b);
// Triangular law on (0,2): density y on (0,1], 2-y on (1,2).
DistPtr triangular_conv_dist();
// Density y*e^{-y} on (0,inf) (sum of two unit exponentials).
DistPtr gamma2_dist();
// Law of X + c when X ~ inner.
DistPtr shifted_dist(DistPtr inner, double c);
// Continuous law given by an explicit pdf; cdf tabulated by quadrature at
// construction (double accuracy only; no extended-precision path).
DistPtr numeric_pdf_dist(std::function<double(double)> pdf, SupportInterval sup, std::string label);

// Lemma-1-style primitives.
double inverse_cdf_sample(const ScalarDistribution& d, const UnitValue& t);
Real inverse_cdf_sample_r(const ScalarDistribution& d, const Real& t);
UnitValue uniformize(const ScalarDistribution& d, const Real& x, const UnitValue& lam);
double sample(const ScalarDistribution& d, RngStream& rng);
Real sample_r(const ScalarDistribution& d, RngStream& rng, long prec);

// Double-precision standard normal helpers (quantile via rational approx +
// Newton polish).
double std_normal_cdf(double x);
double std_normal_quantile(double t);

}  // namespace pm
