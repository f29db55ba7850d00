#include "filtan/ratfun.hpp"

#include <sstream>

namespace filtan {

void RatFun::normalize() {
  if (den_.is_zero()) throw std::domain_error("rational function with zero denominator");
  if (num_.is_zero()) {
    den_ = Poly(Rat(1));
    return;
  }
  Poly g = Poly::gcd(num_, den_);
  if (g.degree() > 0) {
    num_ = Poly::divmod(num_, g).first;
    den_ = Poly::divmod(den_, g).first;
  }
  Rat scale = den_.constant().is_zero() ? den_.leading() : den_.constant();
  if (scale != Rat(1)) {
    Rat inv = scale.inv();
    num_ = num_.scaled(inv);
    den_ = den_.scaled(inv);
  }
}

RatFun RatFun::operator-() const {
  RatFun r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

RatFun operator+(const RatFun& a, const RatFun& b) {
  return RatFun(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RatFun operator-(const RatFun& a, const RatFun& b) {
  return RatFun(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

RatFun operator*(const RatFun& a, const RatFun& b) {
  return RatFun(a.num_ * b.num_, a.den_ * b.den_);
}

RatFun operator/(const RatFun& a, const RatFun& b) {
  if (b.is_zero()) throw std::domain_error("rational function division by zero");
  return RatFun(a.num_ * b.den_, a.den_ * b.num_);
}

RatFun RatFun::scaled(const Rat& k) const {
  if (k.is_zero()) return RatFun();
  RatFun r;
  r.num_ = num_.scaled(k);
  r.den_ = den_;
  return r;
}

std::vector<Rat> RatFun::develop(size_t n) const {
  if (!causal())
    throw std::domain_error("not causal: development needs a nonzero denominator constant term");
  // den is normalized with constant coefficient 1, so the long-division
  // recurrence is c_k = p_k - sum_{j=1..k} q_j c_{k-j}.
  std::vector<Rat> c(n + 1);
  int qdeg = den_.degree();
  for (size_t k = 0; k <= n; ++k) {
    Rat acc = num_.coeff(k);
    size_t jmax = std::min<size_t>(k, static_cast<size_t>(qdeg));
    for (size_t j = 1; j <= jmax; ++j) acc -= den_.coeff(j) * c[k - j];
    c[k] = acc;
  }
  return c;
}

std::string RatFun::to_string() const {
  if (is_polynomial()) return num_.to_string();
  std::ostringstream out;
  out << "(" << num_.to_string() << ") / (" << den_.to_string() << ")";
  return out.str();
}

RatFun div_causal(const RatFun& a, const RatFun& b) {
  if (b.is_zero()) throw std::domain_error("rational function division by zero");
  if (b.num().constant().is_zero())
    throw std::domain_error("not causal: divisor numerator vanishes at 0");
  return a / b;
}

void check_degree_cap(const RatFun& f, int cap) {
  if (cap <= 0) return;
  if (f.num().degree() > cap || f.den().degree() > cap)
    throw std::length_error("polynomial degree cap exceeded (" + std::to_string(cap) +
                            "): " + f.to_string());
}

}  // namespace filtan
