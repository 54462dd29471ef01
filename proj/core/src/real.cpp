#include "pm/real.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace pm {

Real::Real(long prec) { mpfr_init2(v_, prec); }

Real::Real(double d, long prec) {
  mpfr_init2(v_, prec);
  mpfr_set_d(v_, d, MPFR_RNDN);
}

Real::Real(const Real& o) {
  mpfr_init2(v_, mpfr_get_prec(o.v_));
  mpfr_set(v_, o.v_, MPFR_RNDN);
}

Real::Real(Real&& o) noexcept {
  mpfr_init2(v_, mpfr_get_prec(o.v_));
  mpfr_swap(v_, o.v_);
}

Real& Real::operator=(const Real& o) {
  if (this != &o) {
    mpfr_set_prec(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

Real& Real::operator=(Real&& o) noexcept {
  if (this != &o) mpfr_swap(v_, o.v_);
  return *this;
}

Real::~Real() { mpfr_clear(v_); }

Real Real::from_string(const std::string& s, long prec) {
  Real r(prec);
  if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0 && s.empty())
    throw std::invalid_argument("Real::from_string: bad literal '" + s + "'");
  return r;
}

std::string Real::to_string() const {
  if (mpfr_nan_p(v_)) return "nan";
  if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
  if (mpfr_zero_p(v_)) return "0";
  // ceil(prec*log10(2)) + 2 digits guarantees exact round-trip.
  size_t digits = static_cast<size_t>(std::ceil(static_cast<double>(prec()) * 0.30102999566398119)) + 2;
  mpfr_exp_t e;
  char* s = mpfr_get_str(nullptr, &e, 10, digits, v_, MPFR_RNDN);
  std::string mant(s);
  mpfr_free_str(s);
  std::string sign;
  if (!mant.empty() && mant[0] == '-') {
    sign = "-";
    mant.erase(0, 1);
  }
  // mant is digits with implied decimal point before the first digit; exponent e.
  return sign + "0." + mant + "e" + std::to_string(static_cast<long>(e));
}

Real Real::round_to(long prec) const {
  Real r(prec);
  mpfr_set(r.v_, v_, MPFR_RNDN);
  return r;
}

namespace {
inline long pmax(const Real& a, const Real& b) { return std::max(a.prec(), b.prec()); }
}  // namespace

#define PM_BINOP(op, fn)                          \
  Real Real::operator op(const Real& o) const {   \
    Real r(pmax(*this, o));                       \
    fn(r.raw(), v_, o.raw(), MPFR_RNDN);          \
    return r;                                     \
  }
PM_BINOP(+, mpfr_add)
PM_BINOP(-, mpfr_sub)
PM_BINOP(*, mpfr_mul)
PM_BINOP(/, mpfr_div)
#undef PM_BINOP

#define PM_BINOP_D(op, fn)                      \
  Real Real::operator op(double d) const {      \
    Real r(prec());                             \
    fn(r.raw(), v_, d, MPFR_RNDN);              \
    return r;                                   \
  }
PM_BINOP_D(+, mpfr_add_d)
PM_BINOP_D(-, mpfr_sub_d)
PM_BINOP_D(*, mpfr_mul_d)
PM_BINOP_D(/, mpfr_div_d)
#undef PM_BINOP_D

Real Real::operator-() const {
  Real r(prec());
  mpfr_neg(r.raw(), v_, MPFR_RNDN);
  return r;
}

#define PM_COMPOUND(op, fn)                                   \
  Real& Real::operator op(const Real& o) {                    \
    if (o.prec() > prec()) { *this = (*this).round_to(o.prec()); } \
    fn(v_, v_, o.raw(), MPFR_RNDN);                           \
    return *this;                                             \
  }
PM_COMPOUND(+=, mpfr_add)
PM_COMPOUND(-=, mpfr_sub)
PM_COMPOUND(*=, mpfr_mul)
PM_COMPOUND(/=, mpfr_div)
#undef PM_COMPOUND

Real operator+(double d, const Real& r) { return r + d; }
Real operator-(double d, const Real& r) {
  Real x(r.prec());
  mpfr_d_sub(x.raw(), d, r.raw(), MPFR_RNDN);
  return x;
}
Real operator*(double d, const Real& r) { return r * d; }
Real operator/(double d, const Real& r) {
  Real x(r.prec());
  mpfr_d_div(x.raw(), d, r.raw(), MPFR_RNDN);
  return x;
}

Real fma(const Real& a, const Real& b, const Real& c) {
  Real r(std::max({a.prec(), b.prec(), c.prec()}));
  mpfr_fma(r.raw(), a.raw(), b.raw(), c.raw(), MPFR_RNDN);
  return r;
}

#define PM_UNFN(name, fn)          \
  Real name(const Real& a) {       \
    Real r(a.prec());              \
    fn(r.raw(), a.raw(), MPFR_RNDN); \
    return r;                      \
  }
PM_UNFN(abs, mpfr_abs)
PM_UNFN(sqrt, mpfr_sqrt)
PM_UNFN(exp, mpfr_exp)
PM_UNFN(expm1, mpfr_expm1)
PM_UNFN(log, mpfr_log)
PM_UNFN(log1p, mpfr_log1p)
PM_UNFN(log2, mpfr_log2)
PM_UNFN(erf, mpfr_erf)
PM_UNFN(erfc, mpfr_erfc)
#undef PM_UNFN

Real pow(const Real& a, const Real& b) {
  Real r(pmax(a, b));
  mpfr_pow(r.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return r;
}

Real pow(const Real& a, double b) { return pow(a, Real(b, a.prec())); }

Real min(const Real& a, const Real& b) { return a <= b ? a : b; }
Real max(const Real& a, const Real& b) { return a >= b ? a : b; }

UnitValue::UnitValue(double d, long prec) : r_(d, prec) { clamp(); }
UnitValue::UnitValue(Real r) : r_(std::move(r)) { clamp(); }

UnitValue UnitValue::from_string(const std::string& s, long prec) {
  return UnitValue(Real::from_string(s, prec));
}

void UnitValue::clamp() {
  if (r_.is_nan()) throw std::domain_error("UnitValue: nan");
  if (r_ < 0.0) {
    if (r_ < -1e-6) throw std::domain_error("UnitValue: " + std::to_string(r_.to_double()) + " below 0");
    r_ = Real(0.0, r_.prec());
  } else if (r_ > 1.0) {
    if (r_ > 1.0 + 1e-6) throw std::domain_error("UnitValue: " + std::to_string(r_.to_double()) + " above 1");
    r_ = Real(1.0, r_.prec());
  }
}

}  // namespace pm
