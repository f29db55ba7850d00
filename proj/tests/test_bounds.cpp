// Kernel development, tail bounds, certified l1/linf norms.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "filtan/kernel_bound.hpp"

using namespace filtan;

namespace {

// Random certified-stable second-order kernel: conjugate pole pair strictly
// outside the unit disc (q1^2 < 4 q2 < 4, q2 bounded away from 1).
RatFun rnd_tf2(std::mt19937_64& rng) {
  Rat q2(1 + static_cast<long>(rng() % 80), 100);  // in [0.01, 0.80]
  Rat q1;
  do {
    q1 = Rat(static_cast<long>(rng() % 361) - 180, 100);
  } while (!(q1 * q1 < Rat(4) * q2));
  std::vector<Rat> num;
  for (int i = 0; i < 3; ++i)
    num.push_back(Rat(static_cast<long>(rng() % 41) - 20, 1 + static_cast<long>(rng() % 9)));
  return RatFun(Poly(num), Poly(std::vector<Rat>{Rat(1), q1, q2}));
}

Rat exact_partial_l1(const RatFun& f, size_t terms) {
  Rat s;
  for (const Rat& c : f.develop(terms - 1)) s += abs(c);
  return s;
}

}  // namespace

TEST_CASE("development: FIR numerators reproduce their coefficients") {
  IntervalPoly num(Poly(std::vector<Rat>{Rat(1), Rat(1), Rat(1)}));
  IntervalPoly den(Poly(Rat(1)));
  DevResult dev = develop_until_sign_loss(num, den, 16);
  REQUIRE(dev.head.size() == 16);  // exact zeros continue the development
  CHECK(dev.capped);
  for (size_t k = 0; k < 3; ++k) {
    CHECK(dev.head[k].is_point());
    CHECK(dev.head[k].lo == 1.0);
  }
  for (size_t k = 3; k < 16; ++k) CHECK(dev.head[k].lo == 0.0);
}

TEST_CASE("development: dyadic geometric kernel stays exact into the subnormals") {
  IntervalPoly num(Poly(Rat(1)));
  IntervalPoly den(Poly(std::vector<Rat>{Rat(1), Rat(-1, 2)}));
  DevResult dev = develop_until_sign_loss(num, den, 4096);
  CHECK(!dev.capped);  // sign loss at the subnormal floor, well before n_max
  CHECK(dev.head.size() >= 1000);
  CHECK(dev.head.size() <= 1100);
  for (size_t k = 0; k < 100; ++k) {
    CHECK(dev.head[k].is_point());
    CHECK(dev.head[k].lo == std::ldexp(1.0, -static_cast<int>(k)));
  }
}

TEST_CASE("development: head intervals enclose the exact series") {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 20; ++trial) {
    RatFun f = rnd_tf2(rng);
    DevResult dev =
        develop_until_sign_loss(IntervalPoly(f.num()), IntervalPoly(f.den()), 64);
    std::vector<Rat> exact = f.develop(63);
    for (size_t k = 0; k < dev.head.size(); ++k) {
      CHECK(Rat(dev.head[k].lo) <= exact[k]);
      CHECK(exact[k] <= Rat(dev.head[k].hi));
    }
  }
}

TEST_CASE("development: non-dyadic fourth-order chain loses signs early") {
  // (1 - 9/5 z + 9/10 z^2)(1 - 6/5 z + 1/2 z^2): interval widths grow by a
  // factor ~ sum of |den| coefficients per step while the kernel decays
  // slowly, so the sign is lost after a few dozen terms.
  Poly den = Poly(std::vector<Rat>{Rat(1), Rat(-9, 5), Rat(9, 10)}) *
             Poly(std::vector<Rat>{Rat(1), Rat(-6, 5), Rat(1, 2)});
  Poly num(std::vector<Rat>{Rat(1, 3), Rat(1, 7)});
  DevResult dev = develop_until_sign_loss(IntervalPoly(num), IntervalPoly(den), 4096);
  CHECK(!dev.capped);
  CHECK(dev.head.size() >= 20);
  CHECK(dev.head.size() <= 40);
}

TEST_CASE("development rejects denominators whose constant term may vanish") {
  CHECK_THROWS_AS(develop_until_sign_loss(IntervalPoly(Poly(Rat(1))),
                                          IntervalPoly({Interval(-1, 1), Interval(1)}), 8),
                  std::domain_error);
}

TEST_CASE("rough tail bound") {
  // den = z - 2, one root of modulus 2, unit leading coefficient.
  IntervalPoly lin(Poly(std::vector<Rat>{Rat(-2), Rat(1)}));
  CHECK(tail_bound_rough(lin, {2.0}, 1.0) == 1.0);
  CHECK(tail_bound_rough(lin, {2.0, 3.0}, 1.0) == 0.5);
  CHECK(tail_bound_rough(lin, {1.0}, 1.0) == fp::kInf);  // modulus not > 1
  CHECK(tail_bound_rough(IntervalPoly({Interval(1), Interval(-1, 1)}), {2.0}, 1.0) ==
        fp::kInf);  // leading coefficient may vanish
  // 10 - 15z + 7z^2: lead 7, both moduli ~1.1952.
  IntervalPoly q(Poly(std::vector<Rat>{Rat(10), Rat(-15), Rat(7)}));
  double b = tail_bound_rough(q, {1.19, 1.19}, 1.0);
  CHECK(b >= 1.0 / 7.0 / (0.19 * 0.19));
  CHECK(b <= 1.0 / 7.0 / (0.19 * 0.19) * (1 + 1e-12));
}

TEST_CASE("second-order tail: closed form on 1/(1 + z^2/4)") {
  // Conjugate roots of modulus exactly 2; |lambda| = 1 and every operation is
  // dyadic, so the bound is bit-exact: 2 * (1/2)^{N+1} / (1/2) = 2^{1-N}.
  Poly Q(std::vector<Rat>{Rat(1), Rat(0), Rat(1, 4)});
  Poly P(Rat(1));
  CHECK(tail_bound_second_order(P, Q, 0) == 2.0);
  CHECK(tail_bound_second_order(P, Q, 1) == 1.0);
  CHECK(tail_bound_second_order(P, Q, 5) == 0.0625);
  // True tail from 0 is sum 4^-m = 4/3 <= 2.
  RatFun f(P, Q);
  CHECK(Rat(2) >= exact_partial_l1(f, 200));
}

TEST_CASE("second-order tail dominates the exact remainder sums") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 20; ++trial) {
    RatFun f = rnd_tf2(rng);
    for (size_t N : {size_t{0}, size_t{1}, size_t{3}, size_t{10}}) {
      double bound = tail_bound_second_order(f.num(), f.den(), N);
      // Exact sum_{k=N}^{399} |c_k| is a lower bound on the true tail.
      Rat partial;
      std::vector<Rat> c = f.develop(399);
      for (size_t k = N; k < c.size(); ++k) partial += abs(c[k]);
      CHECK(Rat(bound) >= partial);
    }
  }
}

TEST_CASE("second-order tail: degree-2 numerators add the polynomial part at N = 0") {
  Poly Q(std::vector<Rat>{Rat(1), Rat(0), Rat(1, 4)});
  Poly P(std::vector<Rat>{Rat(0), Rat(0), Rat(1)});  // z^2
  // Proper part z^2/Q = 4 - 4/Q: |lambda| = 4, polynomial part |a2|/q2 = 4.
  CHECK(tail_bound_second_order(P, Q, 0) == 12.0);
  CHECK(tail_bound_second_order(P, Q, 1) == 4.0);  // no polynomial part past 0
  RatFun f(P, Q);
  CHECK(Rat(12) >= exact_partial_l1(f, 200));
}

TEST_CASE("second-order tail preconditions") {
  Poly P(Rat(1));
  CHECK_THROWS_AS(tail_bound_second_order(P, Poly(std::vector<Rat>{Rat(1), Rat(-3), Rat(1)}), 0),
                  std::domain_error);  // real roots
  CHECK_THROWS_AS(tail_bound_second_order(P, Poly(std::vector<Rat>{Rat(1), Rat(1), Rat(1)}), 0),
                  std::domain_error);  // q2 = 1: roots on the unit circle
  CHECK_THROWS_AS(tail_bound_second_order(P, Poly(std::vector<Rat>{Rat(1), Rat(-1, 2)}), 0),
                  std::domain_error);  // degree != 2
  CHECK_THROWS_AS(tail_bound_second_order(P, Poly(std::vector<Rat>{Rat(2), Rat(0), Rat(1, 2)}), 0),
                  std::domain_error);  // q0 != 1
  CHECK_THROWS_AS(
      tail_bound_second_order(Poly(std::vector<Rat>{Rat(0), Rat(0), Rat(0), Rat(1)}),
                              Poly(std::vector<Rat>{Rat(1), Rat(0), Rat(1, 4)}), 0),
      std::domain_error);  // deg P = 3
}

TEST_CASE("l1 bound: FIR kernels are exact") {
  RatFun f(Poly(std::vector<Rat>{Rat(1), Rat(2), Rat(-3)}), Poly(Rat(1)));
  KernelBound kb = l1_bound(f);
  CHECK(kb.l1_upper == 6.0);
  CHECK(kb.linf_upper == 3.0);
  CHECK(kb.head_l1 == 6.0);
  CHECK(kb.tail_l1 == 0.0);
  CHECK(kb.method == TailMethod::polynomial_exact);
  CHECK(kb.stability == Stability::stable);
  CHECK(kb.dev_len == 3);

  KernelBound z = l1_bound(RatFun(Rat(0)));
  CHECK(z.l1_upper == 0.0);
  CHECK(z.linf_upper == 0.0);
}

TEST_CASE("l1 bound: dyadic geometric kernel is tight") {
  RatFun f(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-1, 2)}));
  KernelBound kb = l1_bound(f);
  CHECK(kb.l1_upper >= 2.0);
  CHECK(kb.l1_upper <= 2.0 + 1e-6);
  CHECK(kb.stability == Stability::stable);
  CHECK(kb.method == TailMethod::rough_product);  // first-order den
  CHECK(kb.linf_upper >= 1.0);
  CHECK(kb.linf_upper <= kb.l1_upper);
}

TEST_CASE("l1 bound: unit-circle poles are flagged unstable") {
  KernelBound kb = l1_bound(RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-1)})));
  CHECK(kb.stability == Stability::unstable);
  CHECK(std::isinf(kb.l1_upper));
  CHECK(std::isinf(kb.linf_upper));
  CHECK(kb.method == TailMethod::none);

  KernelBound km = l1_bound(RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(1)})));
  CHECK(km.stability == Stability::unstable);

  // Pole strictly inside the disc: 1/(1 - 2z).
  KernelBound ki = l1_bound(RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-2)})));
  CHECK(ki.stability == Stability::unstable);
  CHECK(std::isinf(ki.l1_upper));

  // Conjugate pair on the closed disc via q2 >= 1.
  KernelBound kc = l1_bound(RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(1), Rat(2)})));
  CHECK(kc.stability == Stability::unstable);
}

TEST_CASE("l1 bound invariants on random stable kernels") {
  std::mt19937_64 rng(707);
  for (int trial = 0; trial < 40; ++trial) {
    RatFun f = rnd_tf2(rng);
    KernelBound kb = l1_bound(f);
    REQUIRE(kb.stability == Stability::stable);
    REQUIRE(std::isfinite(kb.l1_upper));
    CHECK(kb.l1_upper == fp::add_up(kb.head_l1, kb.tail_l1));
    CHECK(kb.linf_upper <= kb.l1_upper);
    CHECK(kb.method == TailMethod::second_order_complex);
    // Soundness: dominates the exact partial sums.
    CHECK(Rat(kb.l1_upper) >= exact_partial_l1(f, 400));
    // Dominates the interval-development lower bound too.
    DevResult dev =
        develop_until_sign_loss(IntervalPoly(f.num()), IntervalPoly(f.den()), 2000);
    double lower = 0.0;
    for (const Interval& c : dev.head) lower = fp::add_down(lower, c.mig());
    CHECK(kb.l1_upper >= lower);
  }
}

TEST_CASE("l1 bound: exact-remainder split agrees with the interval split") {
  std::mt19937_64 rng(808);
  BoundConfig exact_cfg;
  exact_cfg.exact_remainder = true;
  for (int trial = 0; trial < 10; ++trial) {
    RatFun f = rnd_tf2(rng);
    KernelBound a = l1_bound(f);
    KernelBound b = l1_bound(f, exact_cfg);
    CHECK(Rat(b.l1_upper) >= exact_partial_l1(f, 400));
    // The exact split is at least as tight, and the interval split's extra
    // width stays small even on slowly decaying kernels.
    CHECK(a.l1_upper >= b.l1_upper * (1 - 1e-9) - 1e-12);
    CHECK(a.l1_upper <= b.l1_upper * 1.05 + 1e-9);
  }
}

TEST_CASE("l1 bound: longer development never hurts on decaying kernels") {
  RatFun f(Poly(std::vector<Rat>{Rat(3, 80), Rat(-19, 400), Rat(103, 600), Rat(7, 600)}),
           Poly(std::vector<Rat>{Rat(1), Rat(-7, 12), Rat(17, 20)}));
  BoundConfig small;
  small.n_max = 16;
  CHECK(l1_bound(f).l1_upper <= l1_bound(f, small).l1_upper);
}

TEST_CASE("l1 bound: frozen second-order regression kernel") {
  // Transfer kernel of a damped two-state feedback loop.  The frozen constant
  // is the exact rational partial sum of its first 3000 coefficients: a true
  // lower bound on ||f||_1 that the certified upper bound must dominate.
  RatFun f(Poly(std::vector<Rat>{Rat(3, 80), Rat(-19, 400), Rat(103, 600), Rat(7, 600)}),
           Poly(std::vector<Rat>{Rat(1), Rat(-7, 12), Rat(17, 20)}));
  KernelBound kb = l1_bound(f);
  CHECK(kb.stability == Stability::stable);
  CHECK(kb.method == TailMethod::second_order_complex);
  CHECK(kb.l1_upper >= 1.3164747287633702);
  CHECK(kb.l1_upper <= 1.317);  // tightness: head of ~112 terms + certified tail
  CHECK(Rat(kb.l1_upper) >= exact_partial_l1(f, 600));
  // And the other published-texture kernel of the same family.
  RatFun g(Poly(std::vector<Rat>{Rat(1, 12), Rat(-1, 60), Rat(-11, 150), Rat(2, 25)}),
           Poly(std::vector<Rat>{Rat(1), Rat(-3, 2), Rat(7, 10)}));
  KernelBound kg = l1_bound(g);
  CHECK(kg.l1_upper >= 0.5127);
  CHECK(kg.l1_upper <= 0.513);
  CHECK(Rat(kg.l1_upper) >= exact_partial_l1(g, 600));
}

TEST_CASE("l1 bound rejects non-causal kernels") {
  RatFun f(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(0), Rat(1)}));  // 1/z
  CHECK_THROWS_AS(l1_bound(f), std::domain_error);
  CHECK_THROWS_AS(linf_bound(f), std::domain_error);
}

TEST_CASE("linf bound: polynomial and proper cases") {
  KernelBound k5 = linf_bound(RatFun(Poly(std::vector<Rat>{Rat(0), Rat(0), Rat(0), Rat(0), Rat(0), Rat(3)}), Poly(Rat(1))));
  CHECK(k5.linf_upper == 3.0);
  CHECK(k5.l1_upper == 3.0);
  CHECK(!k5.strip_one_minus_z);

  RatFun g(Poly(std::vector<Rat>{Rat(1), Rat(1)}), Poly(std::vector<Rat>{Rat(1), Rat(-1, 2)}));
  KernelBound kg = linf_bound(g);
  CHECK(!kg.strip_one_minus_z);
  CHECK(kg.linf_upper >= 1.5);  // c_1 = 3/2 is the peak
  CHECK(kg.linf_upper <= 1.5 + 1e-6);
  CHECK(kg.linf_upper <= kg.l1_upper);
}

TEST_CASE("linf bound: accumulator columns use partial sums") {
  // 10/(1-z): all partial sums equal 10, so the bound is exactly 10.
  RatFun acc(Poly(Rat(10)), Poly(std::vector<Rat>{Rat(1), Rat(-1)}));
  KernelBound ka = linf_bound(acc);
  CHECK(ka.strip_one_minus_z);
  CHECK(ka.linf_upper == 10.0);
  CHECK(std::isinf(ka.l1_upper));  // the l1 norm itself diverges
  CHECK(ka.stability == Stability::stable);  // of the stripped kernel
  CHECK(ka.note.find("partial sums") != std::string::npos);

  // 1/((1-z)(1+z/2)): kernel values are partial sums of (-1/2)^k, peak 1 at
  // k = 0, limit 2/3.  The crude ceiling ||f*(1-z)||_1 = 2 must be beaten.
  RatFun ramp(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-1, 2), Rat(-1, 2)}));
  KernelBound kr = linf_bound(ramp);
  CHECK(kr.strip_one_minus_z);
  CHECK(kr.linf_upper >= 1.0);
  CHECK(kr.linf_upper <= 1.0 + 1e-9);

  // Soundness of the refinement on random accumulated kernels: the bound
  // dominates every exact kernel value.
  std::mt19937_64 rng(909);
  Poly one_minus_z(std::vector<Rat>{Rat(1), Rat(-1)});
  for (int trial = 0; trial < 15; ++trial) {
    RatFun f = rnd_tf2(rng);
    RatFun accf(f.num(), f.den() * one_minus_z);
    KernelBound kb = linf_bound(accf);
    REQUIRE(kb.strip_one_minus_z);
    REQUIRE(std::isfinite(kb.linf_upper));
    Rat peak;
    for (const Rat& c : accf.develop(500)) {
      Rat a = abs(c);
      if (peak < a) peak = a;
    }
    CHECK(Rat(kb.linf_upper) >= peak);
  }
}

TEST_CASE("l1 bound is nearly submultiplicative on exact FIR kernels") {
  RatFun f(Poly(std::vector<Rat>{Rat(1), Rat(-2)}), Poly(Rat(1)));
  RatFun g(Poly(std::vector<Rat>{Rat(3), Rat(1), Rat(1, 2)}), Poly(Rat(1)));
  // FIR bounds are exact rational sums, so submultiplicativity is inherited.
  CHECK(l1_bound(f * g).l1_upper <= l1_bound(f).l1_upper * l1_bound(g).l1_upper);
}
