#include "filtan/interval.hpp"

#include <algorithm>
#include <cstdio>

namespace filtan {

namespace fp {

namespace {

// Fallback for results outside the residual-exactness window: one-ulp outward
// widening of the nearest result.  Round-to-nearest lands within half an ulp
// of the exact value, so the neighbour in the wanted direction is a bound.
// Overflowed results need care: fl(x) = -inf only says x < -DBL_MAX.
inline double widen_up(double r, bool exact_inf) {
  if (std::isinf(r)) {
    if (r > 0) return kInf;
    return exact_inf ? -kInf : -kMax;
  }
  return next_up(r);
}

inline double widen_down(double r, bool exact_inf) {
  if (std::isinf(r)) {
    if (r < 0) return -kInf;
    return exact_inf ? kInf : kMax;
  }
  return next_down(r);
}

inline bool both_small(double a, double b) {
  return std::fabs(a) < kSafeHi && std::fabs(b) < kSafeHi;
}

}  // namespace

double add_up(double a, double b) {
  double r = a + b;
  if (both_small(a, b) && std::fabs(r) < kSafeHi) {
    double e = two_sum_err(a, b, r);
    return e > 0.0 ? next_up(r) : r;
  }
  return widen_up(r, std::isinf(a) || std::isinf(b));
}

double add_down(double a, double b) {
  double r = a + b;
  if (both_small(a, b) && std::fabs(r) < kSafeHi) {
    double e = two_sum_err(a, b, r);
    return e < 0.0 ? next_down(r) : r;
  }
  return widen_down(r, std::isinf(a) || std::isinf(b));
}

double mul_up(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double r = a * b;
  if (in_safe_window(r) && both_small(a, b)) {
    double e = std::fma(a, b, -r);  // exact a*b - r inside the window
    return e > 0.0 ? next_up(r) : r;
  }
  return widen_up(r, std::isinf(a) || std::isinf(b));
}

double mul_down(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double r = a * b;
  if (in_safe_window(r) && both_small(a, b)) {
    double e = std::fma(a, b, -r);
    return e < 0.0 ? next_down(r) : r;
  }
  return widen_down(r, std::isinf(a) || std::isinf(b));
}

double div_up(double a, double b) {
  if (a == 0.0) return 0.0;
  if (std::isinf(b)) return std::isinf(a) ? kInf : 0.0;  // finite/inf: magnitude 0 is an upper bound only if signs say so
  double r = a / b;
  if (in_safe_window(r) && in_safe_window(a) && in_safe_window(b)) {
    double e = std::fma(r, b, -a);  // exact r*b - a; true quotient > r iff -e/b > 0
    bool true_greater = (e != 0.0) && ((e < 0.0) == (b > 0.0));
    return true_greater ? next_up(r) : r;
  }
  return widen_up(r, std::isinf(a));
}

double div_down(double a, double b) {
  if (a == 0.0) return 0.0;
  if (std::isinf(b)) return std::isinf(a) ? -kInf : 0.0;
  double r = a / b;
  if (in_safe_window(r) && in_safe_window(a) && in_safe_window(b)) {
    double e = std::fma(r, b, -a);
    bool true_less = (e != 0.0) && ((e > 0.0) == (b > 0.0));
    return true_less ? next_down(r) : r;
  }
  return widen_down(r, std::isinf(a));
}

double sqrt_up(double a) {
  if (a == 0.0) return 0.0;
  if (std::isinf(a)) return kInf;
  double r = std::sqrt(a);
  if (in_safe_window(a)) {
    double e = std::fma(r, r, -a);  // r*r - a, exact here; true root > r iff e < 0
    return e < 0.0 ? next_up(r) : r;
  }
  return next_up(r);
}

double sqrt_down(double a) {
  if (a == 0.0) return 0.0;
  if (std::isinf(a)) return kMax;
  double r = std::sqrt(a);
  if (in_safe_window(a)) {
    double e = std::fma(r, r, -a);
    double out = e > 0.0 ? next_down(r) : r;
    return out < 0.0 ? 0.0 : out;
  }
  double out = next_down(r);
  return out < 0.0 ? 0.0 : out;
}

}  // namespace fp

double Interval::mid() const {
  if (lo == hi) return lo;
  if (std::isinf(lo) && std::isinf(hi)) return 0.0;
  if (std::isinf(lo)) return -fp::kMax;
  if (std::isinf(hi)) return fp::kMax;
  double m = 0.5 * lo + 0.5 * hi;
  if (!std::isfinite(m)) m = lo + 0.5 * (hi - lo);
  return m;
}

std::string Interval::to_string() const {
  char buf[80];
  std::snprintf(buf, sizeof buf, "[%.17g, %.17g]", lo, hi);
  return buf;
}

Interval add(const Interval& a, const Interval& b) {
  return Interval(fp::add_down(a.lo, b.lo), fp::add_up(a.hi, b.hi));
}

Interval sub(const Interval& a, const Interval& b) {
  return Interval(fp::add_down(a.lo, -b.hi), fp::add_up(a.hi, -b.lo));
}

Interval mul(const Interval& a, const Interval& b) {
  double lo = std::min(std::min(fp::mul_down(a.lo, b.lo), fp::mul_down(a.lo, b.hi)),
                       std::min(fp::mul_down(a.hi, b.lo), fp::mul_down(a.hi, b.hi)));
  double hi = std::max(std::max(fp::mul_up(a.lo, b.lo), fp::mul_up(a.lo, b.hi)),
                       std::max(fp::mul_up(a.hi, b.lo), fp::mul_up(a.hi, b.hi)));
  return Interval(lo, hi);
}

Interval div(const Interval& a, const Interval& b) {
  if (b.contains_zero())
    throw std::domain_error("interval division by an interval containing zero");
  double lo = std::min(std::min(fp::div_down(a.lo, b.lo), fp::div_down(a.lo, b.hi)),
                       std::min(fp::div_down(a.hi, b.lo), fp::div_down(a.hi, b.hi)));
  double hi = std::max(std::max(fp::div_up(a.lo, b.lo), fp::div_up(a.lo, b.hi)),
                       std::max(fp::div_up(a.hi, b.lo), fp::div_up(a.hi, b.hi)));
  return Interval(lo, hi);
}

Interval sqrt(const Interval& a) {
  if (a.lo < 0.0) throw std::domain_error("interval sqrt of a negative interval");
  return Interval(fp::sqrt_down(a.lo), fp::sqrt_up(a.hi));
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

double CInterval::abs_up() const {
  double m2 = fp::add_up(fp::mul_up(re.mag(), re.mag()), fp::mul_up(im.mag(), im.mag()));
  return fp::sqrt_up(m2);
}

CInterval add(const CInterval& a, const CInterval& b) {
  return CInterval(a.re + b.re, a.im + b.im);
}

CInterval sub(const CInterval& a, const CInterval& b) {
  return CInterval(a.re - b.re, a.im - b.im);
}

CInterval mul(const CInterval& a, const CInterval& b) {
  return CInterval(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}

CInterval div(const CInterval& a, const CInterval& b) {
  Interval n2 = b.re * b.re + b.im * b.im;
  if (n2.contains_zero())
    throw std::domain_error("complex interval division by a box containing zero");
  CInterval num = mul(a, CInterval(b.re, -b.im));
  return CInterval(num.re / n2, num.im / n2);
}

}  // namespace filtan
