#include "filtan/kernel_bound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace filtan {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    default: return "unknown";
  }
}

const char* to_string(TailMethod m) {
  switch (m) {
    case TailMethod::polynomial_exact: return "polynomial-exact";
    case TailMethod::second_order_complex: return "second-order-complex";
    case TailMethod::rough_product: return "rough-product";
    default: return "none";
  }
}

DevResult develop_until_sign_loss(const IntervalPoly& num, const IntervalPoly& den, size_t n_max) {
  if (den.size() == 0 || den.coeff(0).contains_zero())
    throw std::domain_error("develop: denominator constant coefficient contains zero");
  const Interval q0 = den.coeff(0);
  DevResult out;
  out.head.reserve(std::min<size_t>(n_max, 256));
  for (size_t k = 0; k < n_max; ++k) {
    Interval acc = num.coeff(k);
    const size_t jmax = std::min(k, den.size() == 0 ? size_t{0} : den.size() - 1);
    for (size_t j = 1; j <= jmax; ++j) {
      const Interval& qj = den.coeff(j);
      if (qj.lo == 0.0 && qj.hi == 0.0) continue;
      acc = acc - qj * out.head[k - j];
    }
    Interval ck = q0.is_point() && q0.lo == 1.0 ? acc : acc / q0;
    const bool exact_zero = ck.lo == 0.0 && ck.hi == 0.0;
    if (ck.contains_zero() && !exact_zero) return out;  // sign lost
    out.head.push_back(ck);
  }
  out.capped = true;
  return out;
}

double tail_bound_rough(const IntervalPoly& den, const std::vector<double>& modulus_lowers,
                        double r_l1) {
  if (den.size() == 0) throw std::domain_error("tail_bound_rough: zero denominator");
  const double lead_lo = den.coeff(den.size() - 1).mig();
  if (!(lead_lo > 0.0)) return fp::kInf;
  double bound = fp::div_up(r_l1, lead_lo);
  for (double m : modulus_lowers) {
    const double gap = fp::sub_down(m, 1.0);
    if (!(gap > 0.0)) return fp::kInf;
    bound = fp::div_up(bound, gap);
  }
  return bound;
}

namespace {

double pow_up(double x, size_t n) {
  double r = 1.0;
  for (size_t i = 0; i < n; ++i) r = fp::mul_up(r, x);
  return r;
}

// Tail of P/Q from index N on, Q = 1 + q1 z + q2 z^2 with a conjugate root
// pair of modulus q2^{-1/2} > 1.  Partial fractions give
//   a_k = -(lambda xi^{-(k+1)} + conj), k >= 1,   a_0 also carries P0 = a2/q2
// with |lambda|^2 available in closed form, so the tail is the geometric sum
//   2|lambda| |xi|^{-(N+1)} / (1 - |xi|^{-1})  (+ |P0| when N = 0, deg P = 2).
double tail_second_order_ip(const IntervalPoly& P, const Rat& q1, const Rat& q2, size_t N) {
  if (P.size() > 3) throw std::domain_error("second-order tail: numerator degree exceeds 2");
  const Rat disc = q1 * q1 - Rat(4) * q2;
  if (!(disc.sign() < 0)) throw std::domain_error("second-order tail: real roots");
  if (!(q2 < Rat(1))) throw std::domain_error("second-order tail: roots not outside unit disc");
  // q2 > 0 follows from the negative discriminant.

  const Interval b1 = (-q1).to_interval();
  const Interval b2 = (-q2).to_interval();
  const Interval a0 = P.coeff(0), a1 = P.coeff(1), a2 = P.coeff(2);

  const Interval num = a2 * a2 + b2 * (-(a1 * a1) - a0 * a1 * b1 + a0 * a0 * b2) +
                       a2 * (a1 * b1 + a0 * (b1 * b1 + Interval(2.0) * b2));
  const Interval den = -(b1 * b1 + Interval(4.0) * b2);  // = -disc > 0
  Interval lam2 = (num / den) / (b2 * b2);
  if (lam2.hi < 0.0) throw std::domain_error("second-order tail: negative |lambda|^2");
  if (lam2.lo < 0.0) lam2 = Interval(0.0, lam2.hi);
  const double lam_up = fp::sqrt_up(lam2.hi);

  const double inv_xi_up = fp::sqrt_up(q2.to_interval().hi);  // |xi|^{-1} = sqrt(q2)
  const double gap = fp::sub_down(1.0, inv_xi_up);
  if (!(gap > 0.0)) throw std::domain_error("second-order tail: modulus too close to 1");

  double bound = fp::div_up(fp::mul_up(fp::mul_up(2.0, lam_up), pow_up(inv_xi_up, N + 1)), gap);
  if (N == 0 && P.size() == 3 && !(a2.lo == 0.0 && a2.hi == 0.0)) {
    const double q2_lo = q2.to_interval().lo;  // q2 > 0
    bound = fp::add_up(bound, fp::div_up(a2.mag(), q2_lo));
  }
  return bound;
}

Interval abs_interval(const Rat& r) {
  return abs(r).to_interval();
}

// Exact head coefficients and remainder: num = D*den + R*z^N.
struct ExactSplit {
  std::vector<Rat> head;
  Poly remainder;
};

ExactSplit exact_split(const RatFun& f, size_t n) {
  ExactSplit s;
  s.head = n == 0 ? std::vector<Rat>{} : f.develop(n - 1);
  Poly d(s.head);
  Poly diff = f.num() - d * f.den();
  std::vector<Rat> rc;
  for (int i = static_cast<int>(n); i <= diff.degree(); ++i) rc.push_back(diff.coeff(i));
  s.remainder = Poly(rc);
  return s;
}

struct TailInput {
  double r_l1 = 0.0;            // upper bound on ||R||_1
  IntervalPoly r;               // remainder enclosure (for the second-order path)
  bool r_zero = false;
  double head_l1 = 0.0;
  double head_max = 0.0;
};

TailInput split_kernel(const RatFun& f, const DevResult& dev, bool exact_remainder) {
  TailInput t;
  const size_t n = dev.head.size();
  if (exact_remainder) {
    ExactSplit s = exact_split(f, n);
    for (const Rat& c : s.head) {
      const Interval a = abs_interval(c);
      t.head_l1 = fp::add_up(t.head_l1, a.hi);
      t.head_max = std::max(t.head_max, a.hi);
    }
    std::vector<Interval> rc;
    Rat rsum;
    for (int i = 0; i <= s.remainder.degree(); ++i) {
      rc.push_back(s.remainder.coeff(i).to_interval());
      rsum += abs(s.remainder.coeff(i));
    }
    t.r = IntervalPoly(rc);
    t.r_l1 = rsum.to_interval().hi;
    t.r_zero = s.remainder.is_zero();
    return t;
  }
  for (const Interval& c : dev.head) {
    t.head_l1 = fp::add_up(t.head_l1, c.mag());
    t.head_max = std::max(t.head_max, c.mag());
  }
  // R~ = coefficients N.. of (num - D~*den), computed in intervals.
  IntervalPoly den(f.den());
  IntervalPoly num(f.num());
  const size_t prod_len = n == 0 ? 0 : n + den.size() - 1;
  const size_t len = std::max(num.size(), prod_len);
  std::vector<Interval> rc;
  bool all_zero = true;
  for (size_t k = n; k < len; ++k) {
    Interval acc = num.coeff(k);
    const size_t jlo = k >= n ? k - n + 1 : 0;
    for (size_t j = jlo; j < den.size() && j <= k; ++j) {
      const Interval& qj = den.coeff(j);
      if (qj.lo == 0.0 && qj.hi == 0.0) continue;
      if (k - j < n) acc = acc - qj * dev.head[k - j];
    }
    rc.push_back(acc);
    if (!(acc.lo == 0.0 && acc.hi == 0.0)) all_zero = false;
  }
  t.r = IntervalPoly(rc);
  for (const Interval& c : rc) t.r_l1 = fp::add_up(t.r_l1, c.mag());
  t.r_zero = all_zero;
  return t;
}

// Exact stability knowledge for second-degree denominators with complex roots.
struct Quad {
  bool applies = false;       // deg 2, negative discriminant
  bool outside_disc = false;  // |roots| > 1, i.e. q2 < 1
  Rat q1, q2;
};

Quad quad_info(const Poly& den) {
  Quad q;
  if (den.degree() != 2) return q;
  q.q1 = den.coeff(1);
  q.q2 = den.coeff(2);
  const Rat disc = q.q1 * q.q1 - Rat(4) * q.q2;  // den normalized: q0 = 1
  if (disc.sign() >= 0) return q;
  q.applies = true;
  q.outside_disc = q.q2 < Rat(1);
  return q;
}

}  // namespace

double tail_bound_second_order(const Poly& P, const Poly& Q, size_t N) {
  if (Q.degree() != 2) throw std::domain_error("second-order tail: denominator degree != 2");
  if (!(Q.coeff(0) == Rat(1)))
    throw std::domain_error("second-order tail: denominator not normalized to q0 = 1");
  return tail_second_order_ip(IntervalPoly(P), Q.coeff(1), Q.coeff(2), N);
}

KernelBound l1_bound(const RatFun& f, const BoundConfig& cfg) {
  if (!f.causal()) throw std::domain_error("l1_bound: kernel is not causal");
  KernelBound kb;
  if (f.is_zero()) return kb;

  if (f.is_polynomial()) {
    Rat sum;
    Rat mx;
    for (int i = 0; i <= f.num().degree(); ++i) {
      const Rat a = abs(f.num().coeff(i));
      sum += a;
      if (mx < a) mx = a;
    }
    kb.l1_upper = sum.to_interval().hi;
    kb.linf_upper = mx.to_interval().hi;
    kb.head_l1 = kb.l1_upper;
    kb.dev_len = static_cast<size_t>(f.num().degree()) + 1;
    return kb;
  }

  const Poly& den = f.den();
  IntervalPoly den_ip(den);

  // Exact unit-circle pole checks, then certified root enclosures.
  const bool pole_pm1 = f.den().eval(Rat(1)).is_zero() || f.den().eval(Rat(-1)).is_zero();
  const Quad quad = quad_info(den);
  RootCertification cert = certify_roots(den_ip, approx_roots(den_ip));
  kb.den_roots = cert.roots;
  kb.note = cert.note;

  bool stable = false, unstable = pole_pm1;
  if (!unstable && quad.applies) {
    if (quad.outside_disc) stable = true;
    else unstable = true;  // |roots|^2 = 1/q2 <= 1
  }
  if (!unstable && !stable) {
    if (cert.per_root_discs) {
      bool all_out = true;
      for (const RootEnclosure& r : cert.roots) {
        if (!(r.modulus_lower > 1.0)) all_out = false;
        const double sup = fp::add_up(std::hypot(r.center.real(), r.center.imag()), r.radius);
        if (sup < 1.0) unstable = true;  // a certified root inside the open unit disc
      }
      if (all_out && !unstable) stable = true;
    } else if (cert.common_modulus_lower > 1.0) {
      stable = true;
    }
  }
  kb.stability = unstable ? Stability::unstable : (stable ? Stability::stable : Stability::unknown);
  if (kb.stability != Stability::stable) {
    kb.l1_upper = kb.linf_upper = kb.tail_l1 = fp::kInf;
    kb.method = TailMethod::none;
    return kb;
  }

  DevResult dev = develop_until_sign_loss(IntervalPoly(f.num()), den_ip, cfg.n_max);
  TailInput t = split_kernel(f, dev, cfg.exact_remainder);
  kb.dev_len = dev.head.size();
  kb.head_l1 = t.head_l1;

  if (t.r_zero) {
    kb.tail_l1 = 0.0;
    kb.method = TailMethod::polynomial_exact;
  } else if (quad.applies && quad.outside_disc && t.r.size() <= 3) {
    // Tail mass = ||R/Q||_1: the z^N shift is already factored out of R,
    // so the remainder series starts at index 0.
    kb.tail_l1 = tail_second_order_ip(t.r, quad.q1, quad.q2, 0);
    kb.method = TailMethod::second_order_complex;
  } else {
    std::vector<double> lowers;
    if (quad.applies && quad.outside_disc) {
      // Exact conjugate-pair modulus: |xi| = q2^{-1/2}.
      const double m = fp::sqrt_down(fp::div_down(1.0, quad.q2.to_interval().hi));
      lowers.assign(2, m);
    } else if (cert.per_root_discs) {
      for (const RootEnclosure& r : cert.roots) lowers.push_back(r.modulus_lower);
    } else {
      lowers.assign(static_cast<size_t>(den.degree()), cert.common_modulus_lower);
    }
    kb.tail_l1 = tail_bound_rough(den_ip, lowers, t.r_l1);
    kb.method = TailMethod::rough_product;
  }

  kb.l1_upper = fp::add_up(kb.head_l1, kb.tail_l1);
  kb.linf_upper = fp::add_up(t.head_max, kb.tail_l1);
  if (!std::isfinite(kb.l1_upper)) {
    kb.stability = Stability::unknown;
    if (kb.note.empty()) kb.note = "tail bound diverged";
  }
  return kb;
}

KernelBound linf_bound(const RatFun& f, const BoundConfig& cfg) {
  if (!f.causal()) throw std::domain_error("linf_bound: kernel is not causal");
  if (!f.is_zero() && f.den().eval(Rat(1)).is_zero()) {
    // Pole at z = 1 (accumulator / constant source): the kernel values of f
    // are the partial sums S_n of g = f * (1-z), so sup|c_k(f)| is bounded by
    // the largest developed partial sum, anchored past the head by
    // |S_{N-1}| + tail_l1(g).  Both stay below the crude ceiling ||g||_1.
    RatFun g = f * RatFun(Poly(std::vector<Rat>{Rat(1), Rat(-1)}));
    KernelBound inner = l1_bound(g, cfg);
    KernelBound kb;
    kb.linf_upper = inner.l1_upper;
    if (inner.stability == Stability::stable && std::isfinite(inner.l1_upper)) {
      DevResult dev =
          develop_until_sign_loss(IntervalPoly(g.num()), IntervalPoly(g.den()), cfg.n_max);
      Interval partial(0.0, 0.0);
      double sup = 0.0;
      for (const Interval& c : dev.head) {
        partial = partial + c;
        sup = std::max(sup, partial.mag());
      }
      const double anchored = fp::add_up(partial.mag(), inner.tail_l1);
      kb.linf_upper = std::min(inner.l1_upper, std::max(sup, anchored));
    }
    kb.l1_upper = fp::kInf;
    kb.head_l1 = inner.head_l1;
    kb.tail_l1 = inner.tail_l1;
    kb.dev_len = inner.dev_len;
    kb.method = inner.method;
    kb.stability = inner.stability;  // stability of the stripped kernel
    kb.strip_one_minus_z = true;
    kb.den_roots = inner.den_roots;
    kb.note = inner.note.empty() ? "sup of partial sums of f*(1-z)" : inner.note;
    return kb;
  }
  return l1_bound(f, cfg);
}

}  // namespace filtan
