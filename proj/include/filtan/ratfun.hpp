#pragma once

/**
 * Rational functions over Rat, reduced by the monic gcd.
 *
 * A causal transfer function is one whose denominator does not vanish at 0
 * (membership in the ring of rationals localized at z); those are kept with
 * the denominator normalized to constant coefficient 1, so the series
 * development is a plain long-division recurrence.  Field operations may
 * leave the causal subring temporarily (Gaussian elimination needs the full
 * fraction field); non-causal values are normalized with a monic denominator
 * and rejected wherever causality is contractual (develop, div_causal,
 * transfer matrices of filters, solutions of network systems).
 */

#include <string>
#include <vector>

#include "filtan/poly.hpp"

namespace filtan {

class RatFun {
 public:
  RatFun() : num_(), den_(Rat(1)) {}
  RatFun(Rat constant) : num_(std::move(constant)), den_(Rat(1)) {}
  RatFun(long constant) : RatFun(Rat(constant)) {}
  RatFun(Poly num) : num_(std::move(num)), den_(Rat(1)) {}
  RatFun(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

  static RatFun z(size_t power = 1) { return RatFun(Poly::z(power)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool causal() const { return !den_.constant().is_zero(); }
  bool is_polynomial() const { return den_.degree() == 0; }

  RatFun operator-() const;
  friend RatFun operator+(const RatFun& a, const RatFun& b);
  friend RatFun operator-(const RatFun& a, const RatFun& b);
  friend RatFun operator*(const RatFun& a, const RatFun& b);
  friend RatFun operator/(const RatFun& a, const RatFun& b);  // field division
  RatFun scaled(const Rat& k) const;

  friend bool operator==(const RatFun& a, const RatFun& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const RatFun& a, const RatFun& b) { return !(a == b); }

  // First n+1 series coefficients c_0..c_n of the development around 0.
  // Requires a causal value.
  std::vector<Rat> develop(size_t n) const;

  std::string to_string() const;
  size_t max_coeff_bit_size() const {
    return std::max(num_.max_coeff_bit_size(), den_.max_coeff_bit_size());
  }

 private:
  void normalize();
  Poly num_, den_;
};

// Division that must stay causal: throws std::domain_error("not causal")
// when the divisor's numerator vanishes at 0 — quotients of transfer
// functions must stay inside the ring localized at z = 0.
RatFun div_causal(const RatFun& a, const RatFun& b);

// Degree guard applied at composition boundaries; throws std::length_error.
void check_degree_cap(const RatFun& f, int cap);

}  // namespace filtan
