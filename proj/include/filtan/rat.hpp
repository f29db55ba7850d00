#pragma once

/**
 * Arbitrary-precision rationals, the coefficient field of every exact
 * computation in the analyzer.  Thin value wrapper around GMP's mpq_class;
 * the canonical form (reduced, positive denominator, zero stored as 0/1)
 * is exactly what mpq canonicalization guarantees.
 */

#include <gmpxx.h>

#include <stdexcept>
#include <string>

#include "filtan/interval.hpp"

namespace filtan {

class Rat {
 public:
  Rat() : v_(0) {}
  Rat(int n) : v_(n) {}
  Rat(long n) : v_(n) {}
  Rat(long n, long d) : v_(n, d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    v_.canonicalize();
  }
  explicit Rat(const mpz_class& n, const mpz_class& d) : v_(n, d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    v_.canonicalize();
  }
  explicit Rat(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }
  // Exact value of a finite double.
  explicit Rat(double x) : v_(x) {
    if (!std::isfinite(x)) throw std::domain_error("rational from non-finite double");
  }

  // Accepts "p", "p/q", and exact decimal literals such as "-0.75" or "1.5e-3".
  static Rat parse(const std::string& text);

  bool is_zero() const { return v_ == 0; }
  int sign() const { return sgn(v_); }
  const mpq_class& raw() const { return v_; }
  mpz_class num() const { return v_.get_num(); }
  mpz_class den() const { return v_.get_den(); }

  Rat operator-() const { return Rat(mpq_class(-v_)); }
  Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
  Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
  Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
  Rat& operator/=(const Rat& o) {
    if (o.is_zero()) throw std::domain_error("rational division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

  Rat abs() const { return Rat(mpq_class(::abs(v_))); }
  Rat inv() const {
    if (is_zero()) throw std::domain_error("rational division by zero");
    return Rat(mpq_class(1 / v_));
  }

  // Nearest double (round to nearest even), and a tight enclosure.
  double to_double() const;
  Interval to_interval() const;
  // Smallest double >= value, largest double <= value.
  double upper() const { return to_interval().hi; }
  double lower() const { return to_interval().lo; }

  std::string to_string() const;
  // Largest bit length among numerator and denominator.
  size_t bit_size() const {
    return std::max(mpz_sizeinbase(v_.get_num_mpz_t(), 2),
                    mpz_sizeinbase(v_.get_den_mpz_t(), 2));
  }

 private:
  mpq_class v_;
};

inline Rat abs(const Rat& r) { return r.abs(); }

}  // namespace filtan
