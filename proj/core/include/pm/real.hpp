#pragma once
#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

namespace pm {

// Arbitrary-precision real backed by MPFR. Value semantics; the precision of
// the result of a binary operation is the max of the operand precisions.
class Real {
 public:
  explicit Real(long prec = 128);
  Real(double d, long prec);
  Real(const Real& o);
  Real(Real&& o) noexcept;
  Real& operator=(const Real& o);
  Real& operator=(Real&& o) noexcept;
  ~Real();

  static Real from_string(const std::string& s, long prec);
  // Decimal string with enough digits to round-trip exactly at this precision.
  std::string to_string() const;

  long prec() const { return mpfr_get_prec(v_); }
  // Same value rounded to a new precision.
  Real round_to(long prec) const;

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  Real operator+(const Real& o) const;
  Real operator-(const Real& o) const;
  Real operator*(const Real& o) const;
  Real operator/(const Real& o) const;
  Real operator-() const;
  Real operator+(double d) const;
  Real operator-(double d) const;
  Real operator*(double d) const;
  Real operator/(double d) const;
  Real& operator+=(const Real& o);
  Real& operator-=(const Real& o);
  Real& operator*=(const Real& o);
  Real& operator/=(const Real& o);

  int cmp(const Real& o) const { return mpfr_cmp(v_, o.v_); }
  int cmp(double d) const { return mpfr_cmp_d(v_, d); }
  bool operator<(const Real& o) const { return cmp(o) < 0; }
  bool operator<=(const Real& o) const { return cmp(o) <= 0; }
  bool operator>(const Real& o) const { return cmp(o) > 0; }
  bool operator>=(const Real& o) const { return cmp(o) >= 0; }
  bool operator==(const Real& o) const { return cmp(o) == 0; }
  bool operator!=(const Real& o) const { return cmp(o) != 0; }
  bool operator<(double d) const { return cmp(d) < 0; }
  bool operator<=(double d) const { return cmp(d) <= 0; }
  bool operator>(double d) const { return cmp(d) > 0; }
  bool operator>=(double d) const { return cmp(d) >= 0; }
  bool operator==(double d) const { return cmp(d) == 0; }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

 private:
  mpfr_t v_;
};

Real operator+(double d, const Real& r);
Real operator-(double d, const Real& r);
Real operator*(double d, const Real& r);
Real operator/(double d, const Real& r);

Real fma(const Real& a, const Real& b, const Real& c);  // a*b + c
Real abs(const Real& a);
Real sqrt(const Real& a);
Real exp(const Real& a);
Real expm1(const Real& a);
Real log(const Real& a);
Real log1p(const Real& a);
Real log2(const Real& a);
Real pow(const Real& a, const Real& b);
Real pow(const Real& a, double b);
Real erf(const Real& a);
Real erfc(const Real& a);
Real min(const Real& a, const Real& b);
Real max(const Real& a, const Real& b);

// Extended-precision value confined to [0,1] (quantile space). Arithmetic is
// done on the underlying Real; construction clamps sub-ulp overshoot.
class UnitValue {
 public:
  UnitValue() : r_(0.0, 128) {}
  explicit UnitValue(double d, long prec = 128);
  explicit UnitValue(Real r);

  const Real& r() const { return r_; }
  long prec() const { return r_.prec(); }
  double to_double() const { return r_.to_double(); }
  std::string to_string() const { return r_.to_string(); }
  static UnitValue from_string(const std::string& s, long prec);

  bool operator<(const UnitValue& o) const { return r_ < o.r_; }
  bool operator<=(const UnitValue& o) const { return r_ <= o.r_; }
  bool operator==(const UnitValue& o) const { return r_ == o.r_; }

 private:
  void clamp();
  Real r_;
};

}  // namespace pm
