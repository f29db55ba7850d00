#pragma once

/**
 * Outward-rounded binary64 interval arithmetic.
 *
 * Directed endpoints are obtained without touching the FPU rounding mode:
 * every primitive computes the round-to-nearest result and recovers the
 * sign of the rounding error through an error-free transformation (TwoSum
 * for +/-, an FMA residual for *, / and sqrt), then nudges the endpoint by
 * one ulp only when the error points the wrong way.  Endpoints are exact
 * whenever the operation was exact, and off by at most one ulp otherwise.
 * Near the over/underflow thresholds, where the residual theorems stop
 * applying, the code falls back to unconditional one-ulp outward widening
 * of the nearest result, which is still a correct enclosure.
 *
 * Nothing here ever calls fesetround, so any thread may evaluate intervals
 * concurrently.  Compile with contraction disabled (-ffp-contract=off):
 * a contracted a*b+c would falsify the TwoSum identities.
 */

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace filtan {

namespace fp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMax = std::numeric_limits<double>::max();
// Magnitude window where the TwoSum / FMA residuals are provably exact.
inline constexpr double kSafeHi = 0x1p+960;
inline constexpr double kSafeLo = 0x1p-960;

inline double next_up(double x) { return std::nextafter(x, kInf); }
inline double next_down(double x) { return std::nextafter(x, -kInf); }

inline bool in_safe_window(double x) {
  double a = std::fabs(x);
  return a >= kSafeLo && a <= kSafeHi;
}

// Knuth TwoSum residual: exact (a + b) - r for r = fl(a + b).
inline double two_sum_err(double a, double b, double r) {
  double bv = r - a;
  return (a - (r - bv)) + (b - bv);
}

double add_up(double a, double b);
double add_down(double a, double b);
inline double sub_up(double a, double b) { return add_up(a, -b); }
inline double sub_down(double a, double b) { return add_down(a, -b); }
double mul_up(double a, double b);
double mul_down(double a, double b);
double div_up(double a, double b);    // pre: b != 0
double div_down(double a, double b);  // pre: b != 0
double sqrt_up(double a);             // pre: a >= 0
double sqrt_down(double a);           // pre: a >= 0

}  // namespace fp

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double point) : lo(point), hi(point) {
    if (std::isnan(point)) throw std::invalid_argument("interval endpoint is NaN");
  }
  Interval(double l, double h) : lo(l), hi(h) {
    if (std::isnan(l) || std::isnan(h)) throw std::invalid_argument("interval endpoint is NaN");
    if (l > h) throw std::invalid_argument("interval endpoints out of order");
  }

  bool is_point() const { return lo == hi; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
  bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }

  // Largest / smallest magnitude of any member.
  double mag() const { return std::fmax(std::fabs(lo), std::fabs(hi)); }
  double mig() const {
    if (contains_zero()) return 0.0;
    return std::fmin(std::fabs(lo), std::fabs(hi));
  }
  double mid() const;
  double width_up() const { return fp::sub_up(hi, lo); }

  Interval operator-() const { return Interval(-hi, -lo); }
  std::string to_string() const;
};

Interval add(const Interval& a, const Interval& b);
Interval sub(const Interval& a, const Interval& b);
Interval mul(const Interval& a, const Interval& b);
Interval div(const Interval& a, const Interval& b);  // throws if b contains 0
Interval sqrt(const Interval& a);                    // throws if a.lo < 0
Interval hull(const Interval& a, const Interval& b);

inline Interval operator+(const Interval& a, const Interval& b) { return add(a, b); }
inline Interval operator-(const Interval& a, const Interval& b) { return sub(a, b); }
inline Interval operator*(const Interval& a, const Interval& b) { return mul(a, b); }
inline Interval operator/(const Interval& a, const Interval& b) { return div(a, b); }

// Rectangular complex interval, sufficient for the root certification step.
struct CInterval {
  Interval re, im;

  CInterval() = default;
  CInterval(Interval r, Interval i) : re(r), im(i) {}
  CInterval(double r, double i) : re(r), im(i) {}

  bool contains(double x, double y) const { return re.contains(x) && im.contains(y); }
  bool contains_zero() const { return re.contains_zero() && im.contains_zero(); }

  CInterval operator-() const { return CInterval(-re, -im); }
  // Upper bound on |z| over the whole box.
  double abs_up() const;
};

CInterval add(const CInterval& a, const CInterval& b);
CInterval sub(const CInterval& a, const CInterval& b);
CInterval mul(const CInterval& a, const CInterval& b);
CInterval div(const CInterval& a, const CInterval& b);  // throws if b contains 0

inline CInterval operator+(const CInterval& a, const CInterval& b) { return add(a, b); }
inline CInterval operator-(const CInterval& a, const CInterval& b) { return sub(a, b); }
inline CInterval operator*(const CInterval& a, const CInterval& b) { return mul(a, b); }
inline CInterval operator/(const CInterval& a, const CInterval& b) { return div(a, b); }

}  // namespace filtan
