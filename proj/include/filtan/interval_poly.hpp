#pragma once

/**
 * Polynomials with interval coefficients: the bridge between the exact
 * rational layer and the floating-point bound computations.
 */

#include <vector>

#include "filtan/interval.hpp"
#include "filtan/poly.hpp"

namespace filtan {

class IntervalPoly {
 public:
  IntervalPoly() = default;
  explicit IntervalPoly(std::vector<Interval> coeffs) : c_(std::move(coeffs)) {}
  // Outward-rounded enclosure of an exact polynomial.
  explicit IntervalPoly(const Poly& p) {
    c_.reserve(p.coeffs().size());
    for (const Rat& r : p.coeffs()) c_.push_back(r.to_interval());
  }

  size_t size() const { return c_.size(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  Interval coeff(size_t i) const { return i < c_.size() ? c_[i] : Interval(0.0); }
  const std::vector<Interval>& coeffs() const { return c_; }

  CInterval eval(const CInterval& x) const {
    CInterval acc(Interval(0.0), Interval(0.0));
    for (size_t i = c_.size(); i-- > 0;) acc = acc * x + CInterval(c_[i], Interval(0.0));
    return acc;
  }

  std::vector<double> midpoints() const {
    std::vector<double> m(c_.size());
    for (size_t i = 0; i < c_.size(); ++i) m[i] = c_[i].mid();
    return m;
  }

 private:
  std::vector<Interval> c_;
};

// True iff every coefficient interval contains 0 (the zero polynomial is a
// member of the family).  The empty polynomial is exactly zero: true.
inline bool contains_zero(const IntervalPoly& p) {
  for (size_t i = 0; i < p.size(); ++i)
    if (!p.coeff(i).contains_zero()) return false;
  return true;
}

}  // namespace filtan
