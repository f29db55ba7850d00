#include "filtan/poly.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <sstream>

namespace filtan {

// ---- Rat pieces that need more than the header ----

Rat Rat::parse(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; }),
          s.end());
  if (s.empty()) throw std::invalid_argument("empty rational literal");

  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string n = s.substr(0, slash), d = s.substr(slash + 1);
    try {
      // Base 10 explicitly: gmpxx's default base 0 would read 08 as octal.
      mpq_class q{mpz_class(n, 10), mpz_class(d, 10)};
      if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
      q.canonicalize();
      return Rat(q);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("bad rational literal: " + text);
    }
  }

  // Decimal form: [-]digits[.digits][(e|E)[-]digits], parsed exactly.
  size_t pos = 0;
  bool neg = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) neg = s[pos++] == '-';
  std::string digits;
  long exp10 = 0;
  bool any = false;
  while (pos < s.size() && isdigit(static_cast<unsigned char>(s[pos]))) {
    digits += s[pos++];
    any = true;
  }
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && isdigit(static_cast<unsigned char>(s[pos]))) {
      digits += s[pos++];
      --exp10;
      any = true;
    }
  }
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    bool eneg = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) eneg = s[pos++] == '-';
    if (pos >= s.size()) throw std::invalid_argument("bad rational literal: " + text);
    long e = 0;
    while (pos < s.size() && isdigit(static_cast<unsigned char>(s[pos]))) {
      e = e * 10 + (s[pos++] - '0');
      if (e > 100000) throw std::invalid_argument("exponent out of range: " + text);
    }
    exp10 += eneg ? -e : e;
  }
  if (!any || pos != s.size()) throw std::invalid_argument("bad rational literal: " + text);

  mpz_class mant(digits.empty() ? "0" : digits, 10);
  if (neg) mant = -mant;
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(exp10)));
  mpq_class q = exp10 >= 0 ? mpq_class(mant * p10) : mpq_class(mant, p10);
  q.canonicalize();
  return Rat(q);
}

Interval Rat::to_interval() const {
  double d = v_.get_d();  // rounds toward zero
  if (std::isinf(d))
    return d > 0 ? Interval(fp::kMax, fp::kInf) : Interval(-fp::kInf, -fp::kMax);
  if (mpq_class(d) == v_) return Interval(d);
  if (v_ > 0) return Interval(d, fp::next_up(d));
  return Interval(fp::next_down(d), d);
}

double Rat::to_double() const {
  Interval e = to_interval();
  if (e.lo == e.hi) return e.lo;
  if (std::isinf(e.lo)) return e.hi == fp::kInf ? fp::kMax : e.hi;  // clamp overflow
  if (std::isinf(e.hi)) return e.lo;
  mpq_class dl = v_ - mpq_class(e.lo);
  mpq_class dh = mpq_class(e.hi) - v_;
  if (dl < dh) return e.lo;
  if (dh < dl) return e.hi;
  // Tie: round to even mantissa (adjacent doubles, exactly one has bit 0 clear).
  return (std::bit_cast<uint64_t>(e.lo) & 1u) == 0 ? e.lo : e.hi;
}

std::string Rat::to_string() const {
  if (v_.get_den() == 1) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

// ---- Poly ----

Poly Poly::operator-() const {
  std::vector<Rat> r(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) r[i] = -c_[i];
  return Poly(std::move(r));
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Rat> r(std::max(a.c_.size(), b.c_.size()));
  for (size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) + b.coeff(i);
  return Poly(std::move(r));
}

Poly operator-(const Poly& a, const Poly& b) {
  std::vector<Rat> r(std::max(a.c_.size(), b.c_.size()));
  for (size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) - b.coeff(i);
  return Poly(std::move(r));
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<Rat> r(a.c_.size() + b.c_.size() - 1);
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i].is_zero()) continue;
    for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  }
  return Poly(std::move(r));
}

Poly Poly::scaled(const Rat& k) const {
  if (k.is_zero()) return Poly();
  std::vector<Rat> r(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) r[i] = c_[i] * k;
  return Poly(std::move(r));
}

Poly Poly::shifted(size_t k) const {
  if (is_zero() || k == 0) return k == 0 ? *this : Poly();
  std::vector<Rat> r(c_.size() + k);
  for (size_t i = 0; i < c_.size(); ++i) r[i + k] = c_[i];
  return Poly(std::move(r));
}

Rat Poly::eval(const Rat& x) const {
  Rat acc(0);
  for (size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
  return acc;
}

std::pair<Poly, Poly> Poly::divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly(), a};
  std::vector<Rat> rem(a.c_);
  std::vector<Rat> quo(a.c_.size() - b.c_.size() + 1);
  Rat lead = b.leading();
  for (int i = static_cast<int>(rem.size()) - 1; i >= static_cast<int>(b.c_.size()) - 1; --i) {
    if (rem[i].is_zero()) continue;
    Rat q = rem[i] / lead;
    size_t shift = i - (b.c_.size() - 1);
    quo[shift] = q;
    for (size_t j = 0; j < b.c_.size(); ++j) rem[shift + j] -= q * b.c_[j];
  }
  return {Poly(std::move(quo)), Poly(std::move(rem))};
}

Poly Poly::gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return a.scaled(a.leading().inv());  // monic
}

Rat Poly::coeff_abs_sum() const {
  Rat s(0);
  for (const Rat& c : c_) s += c.abs();
  return s;
}

size_t Poly::max_coeff_bit_size() const {
  size_t m = 0;
  for (const Rat& c : c_) m = std::max(m, c.bit_size());
  return m;
}

std::string Poly::to_string(const std::string& var) const {
  if (is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (size_t i = 0; i < c_.size(); ++i) {
    const Rat& c = c_[i];
    if (c.is_zero()) continue;
    Rat a = c.abs();
    if (first) {
      if (c.sign() < 0) out << "-";
      first = false;
    } else {
      out << (c.sign() < 0 ? " - " : " + ");
    }
    bool unit = a == Rat(1) && i > 0;
    if (!unit) out << a.to_string();
    if (i > 0) {
      if (!unit) out << "*";
      out << var;
      if (i > 1) out << "^" << i;
    }
  }
  return out.str();
}

}  // namespace filtan
