#pragma once

/**
 * Dense univariate polynomials over Rat in the series variable z, where z is
 * the unit delay (NOT z^-1).  Canonical form: no trailing zero coefficients,
 * the zero polynomial is the empty vector (degree -1 by convention).
 */

#include <string>
#include <vector>

#include "filtan/rat.hpp"

namespace filtan {

class Poly {
 public:
  Poly() = default;
  Poly(Rat constant) { c_.push_back(std::move(constant)); normalize(); }
  Poly(long constant) : Poly(Rat(constant)) {}
  explicit Poly(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { normalize(); }

  static Poly z(size_t power = 1) {
    std::vector<Rat> c(power + 1);
    c[power] = Rat(1);
    return Poly(std::move(c));
  }

  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  Rat coeff(size_t i) const { return i < c_.size() ? c_[i] : Rat(0); }
  const std::vector<Rat>& coeffs() const { return c_; }
  Rat leading() const { return c_.empty() ? Rat(0) : c_.back(); }
  Rat constant() const { return coeff(0); }

  Poly operator-() const;
  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly scaled(const Rat& k) const;
  // Multiply by z^k.
  Poly shifted(size_t k) const;

  Rat eval(const Rat& x) const;
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  // Euclidean division: a = q*b + r with deg r < deg b.  Throws on b = 0.
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);
  // Monic gcd; gcd(0, 0) = 0.
  static Poly gcd(Poly a, Poly b);

  // Sum of |coefficients| (exact, used for quantization deltas).
  Rat coeff_abs_sum() const;
  size_t max_coeff_bit_size() const;

  std::string to_string(const std::string& var = "z") const;

 private:
  void normalize() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  std::vector<Rat> c_;
};

}  // namespace filtan
