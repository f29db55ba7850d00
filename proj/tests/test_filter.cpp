// Abstract filters: blocks, combinators, quantization, output bounds.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "filtan/abstract_filter.hpp"

using namespace filtan;

namespace {

const FloatFormat kExact = FloatFormat::exact();
const FloatFormat kF64 = FloatFormat::ieee64();
const FloatFormat kF32 = FloatFormat::ieee32();

RatFun rf(std::initializer_list<long> num) {
  std::vector<Rat> c;
  for (long v : num) c.emplace_back(v);
  return RatFun(Poly(c));
}

// Manual exact filter (all eps zero) around a given transfer matrix.
AbstractFilter manual(RatFunMatrix T, RatFunMatrix D = RatFunMatrix(0, 0),
                      std::vector<ResetSlot> resets = {}) {
  AbstractFilter f;
  if (D.rows() == 0 && D.cols() == 0) D = RatFunMatrix(T.rows(), 0);
  f.T = std::move(T);
  f.D = std::move(D);
  f.eps_rel_T = NonnegMatrix(f.T.rows(), f.T.cols());
  f.eps_rel_D = NonnegMatrix(f.D.rows(), f.D.cols());
  f.eps_abs.assign(f.T.rows(), 0.0);
  f.resets = std::move(resets);
  f.validate();
  return f;
}

RatFun rnd_causal(std::mt19937_64& rng) {
  auto coef = [&] { return Rat(static_cast<long>(rng() % 13) - 6, 1 + static_cast<long>(rng() % 5)); };
  std::vector<Rat> num{coef(), coef(), coef()};
  std::vector<Rat> den{Rat(1), coef()};
  return RatFun(Poly(num), Poly(den));
}

}  // namespace

TEST_CASE("plus: one rounded addition") {
  AbstractFilter f = make_plus(kF64);
  f.validate();
  CHECK(f.n_in() == 2);
  CHECK(f.n_out() == 1);
  CHECK(f.n_reset() == 0);
  CHECK(f.T.at(0, 0) == RatFun(Rat(1)));
  CHECK(f.T.at(0, 1) == RatFun(Rat(1)));
  CHECK(f.eps_rel_T.at(0, 0) == 0x1p-53);
  CHECK(f.eps_rel_T.at(0, 1) == 0x1p-53);
  CHECK(f.eps_abs[0] == 0x1p-1074);

  AbstractFilter f32 = make_plus(kF32);
  CHECK(f32.eps_rel_T.at(0, 0) == 0x1p-24);
  CHECK(f32.eps_abs[0] == 0x1p-149);

  AbstractFilter fe = make_plus(kExact);
  CHECK(fe.eps_rel_T.at(0, 0) == 0.0);
  CHECK(fe.eps_abs[0] == 0.0);
}

TEST_CASE("scale: |k| u relative plus the subnormal floor") {
  AbstractFilter f = make_scale(Rat(2), kF64);
  CHECK(f.T.at(0, 0) == RatFun(Rat(2)));
  CHECK(f.eps_rel_T.at(0, 0) == 0x1p-52);
  CHECK(f.eps_abs[0] == 0x1p-1074);

  AbstractFilter g = make_scale(Rat(1, 3), kF64);
  CHECK(g.eps_rel_T.at(0, 0) >= 0x1p-55);
  CHECK(g.eps_rel_T.at(0, 0) <= 0x1p-54);

  CHECK(make_scale(Rat(-5), kExact).eps_abs[0] == 0.0);
  CHECK(make_scale(Rat(1, 3), FloatFormat::fixed_point(0.125, true)).eps_abs[0] == 0.0625);
}

TEST_CASE("scale_error and representation_error primitives") {
  CHECK(scale_error(Rat(1, 2), kF64) == std::pair{0.0, 0x1p-1074});  // pow2 < 1
  CHECK(scale_error(Rat(4), kF64) == std::pair{0.0, 0.0});           // pow2 >= 1
  CHECK(scale_error(Rat(1, 3), kF64).first > 0.0);
  CHECK(scale_error(Rat(7), FloatFormat::fixed_point(0.25)) == std::pair{0.0, 0.0});
  CHECK(representation_error(Rat(10), kF64) == 0.0);
  CHECK(representation_error(Rat(1, 3), kF64) > 0.0);
  CHECK(representation_error(Rat(1, 3), kF64) < 1e-16);
  CHECK(representation_error(Rat(1, 3), kF32) > 1e-9);
  CHECK(representation_error(Rat(3, 4), FloatFormat::fixed_point(0.25)) == 0.0);
}

TEST_CASE("delays: exact, with and without initialization") {
  AbstractFilter d = make_delay(3);
  CHECK(d.T.at(0, 0) == RatFun(Poly::z(3)));
  CHECK(d.eps_abs[0] == 0.0);
  CHECK(d.n_reset() == 0);

  AbstractFilter di = make_delay_init(2, "i", Rat(1, 2), kF64);
  CHECK(di.T.at(0, 0) == RatFun(Poly::z(2)));
  CHECK(di.D.at(0, 0) == RatFun(Poly(std::vector<Rat>{Rat(1, 2), Rat(1, 2)})));
  REQUIRE(di.n_reset() == 1);
  CHECK(di.resets[0].label == "i");
  CHECK(!di.resets[0].constant_one);
  CHECK(di.eps_rel_D.at(0, 0) == 0.0);  // power-of-two load is exact
  CHECK(di.eps_abs[0] == 0x1p-1074);

  CHECK(make_delay_init(1, "i", Rat(1), kF64).eps_abs[0] == 0.0);
  CHECK(make_delay_init(1, "i", Rat(1, 3), kF64).eps_rel_D.at(0, 0) > 0.0);
  CHECK_THROWS_AS(make_delay_init(0, "i", Rat(1), kF64), std::invalid_argument);
}

TEST_CASE("constant sources pin a pseudo reset to 1") {
  AbstractFilter c = make_constant_source(Rat(10), kF64);
  CHECK(c.n_in() == 0);
  CHECK(c.D.at(0, 0) == RatFun(Poly(Rat(10)), Poly(std::vector<Rat>{Rat(1), Rat(-1)})));
  REQUIRE(c.resets.size() == 1);
  CHECK(c.resets[0].constant_one);
  CHECK(c.eps_abs[0] == 0.0);  // 10 is representable

  // No reset_bounds entry needed for the pinned slot; the bound is exact.
  auto ob = output_bound(c, {}, {});
  REQUIRE(ob.size() == 1);
  CHECK(ob[0].bounded);
  CHECK(ob[0].gain == 0.0);
  CHECK(ob[0].total == 10.0);
  CHECK(output_bound(make_constant_source(Rat(0), kF64), {}, {})[0].total == 0.0);
  CHECK(output_bound(make_constant_source(Rat(-3), kF64), {}, {})[0].total == 3.0);
  CHECK(make_constant_source(Rat(1, 3), kF64).eps_abs[0] > 0.0);
}

TEST_CASE("routing blocks") {
  AbstractFilter r = make_route(2, 2, {{0, 1}, {-1, 0}});
  CHECK(r.T.at(0, 1) == RatFun(Rat(1)));
  CHECK(r.T.at(1, 0) == RatFun(Rat(-1)));
  CHECK(r.T.at(0, 0).is_zero());
  CHECK(r.eps_abs[0] == 0.0);

  CHECK_THROWS_AS(make_route(1, 2, {{1, 2}}), std::invalid_argument);   // entry not in {-1,0,1}
  CHECK_THROWS_AS(make_route(1, 2, {{1, 1}}), std::invalid_argument);   // two signals would sum
  CHECK_THROWS_AS(make_route(2, 1, {{1}}), std::invalid_argument);      // row count mismatch

  AbstractFilter w = make_wire(2);
  CHECK(w.T == RatFunMatrix::identity(2));
  AbstractFilter fo = make_fanout(3);
  CHECK(fo.n_out() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK(fo.T.at(i, 0) == RatFun(Rat(1)));
}

TEST_CASE("parallel composition stacks block-diagonally") {
  AbstractFilter p2 = compose_parallel(make_plus(kF64), make_plus(kF64));
  CHECK(p2.n_in() == 4);
  CHECK(p2.n_out() == 2);
  CHECK(p2.T.at(0, 0) == RatFun(Rat(1)));
  CHECK(p2.T.at(1, 2) == RatFun(Rat(1)));
  CHECK(p2.T.at(0, 2).is_zero());
  CHECK(p2.T.at(1, 0).is_zero());
  CHECK(p2.eps_rel_T.at(0, 2) == 0.0);
  CHECK(p2.eps_rel_T.at(1, 3) == 0x1p-53);
  CHECK(p2.eps_abs[1] == 0x1p-1074);

  // (2 out, 1 in) next to (1 out, 2 in).
  AbstractFilter a = compose_parallel(make_fanout(2), make_plus(kExact));
  CHECK(a.n_out() == 3);
  CHECK(a.n_in() == 3);

  // Identity element.
  AbstractFilter f = make_scale(Rat(7), kF64);
  AbstractFilter fe = compose_parallel(f, AbstractFilter{});
  CHECK(fe.T == f.T);
  CHECK(fe.eps_rel_T.at(0, 0) == f.eps_rel_T.at(0, 0));

  // Reset slots concatenate in order.
  AbstractFilter dd = compose_parallel(make_delay_init(1, "a", Rat(1), kExact),
                                       make_delay_init(1, "b", Rat(1), kExact));
  REQUIRE(dd.n_reset() == 2);
  CHECK(dd.resets[0].label == "a");
  CHECK(dd.resets[1].label == "b");
  CHECK(dd.D.at(0, 1).is_zero());
  CHECK(dd.D.at(1, 0).is_zero());
}

TEST_CASE("serial composition: transfer product, reset pass-through") {
  // Exact scales: pure product, no error terms.
  AbstractFilter h = compose_serial(make_scale(Rat(3), kExact), make_scale(Rat(5), kExact));
  CHECK(h.T.at(0, 0) == RatFun(Rat(15)));
  CHECK(h.eps_rel_T.at(0, 0) == 0.0);
  CHECK(h.eps_abs[0] == 0.0);

  // g after f: the initialized delay's response is scaled by g.
  AbstractFilter gf = compose_serial(make_scale(Rat(2), kExact),
                                     make_delay_init(1, "a", Rat(1), kExact));
  CHECK(gf.T.at(0, 0) == RatFun(Poly(std::vector<Rat>{Rat(0), Rat(2)})));  // 2z
  CHECK(gf.D.at(0, 0) == RatFun(Rat(2)));
  REQUIRE(gf.resets.size() == 1);
  CHECK(gf.resets[0].label == "a");

  // Dimension mismatch is rejected.
  CHECK_THROWS_AS(compose_serial(make_plus(kExact), make_plus(kExact)), std::invalid_argument);
}

TEST_CASE("serial composition error accounting") {
  // scale(3) after scale(5), ieee64: g amplifies f's drift by l1(g)=3 and adds
  // its own rounding on a signal of size l1(f)=5, so
  // eps_rel >= 3*(5u) + (3u)*5 = 30u with u = 2^-53.
  AbstractFilter h = compose_serial(make_scale(Rat(3), kF64), make_scale(Rat(5), kF64));
  CHECK(h.eps_rel_T.at(0, 0) >= 30 * 0x1p-53);
  CHECK(h.eps_rel_T.at(0, 0) <= 31 * 0x1p-53);
  CHECK(h.eps_abs[0] >= 4 * 0x1p-1074);  // 3*eps_abs_f + eps_abs_g, rounded up
  CHECK(h.eps_abs[0] <= 1e-300);

  // Exact g after noisy f: eps_abs specializes to l1(g) * eps_abs_f.
  AbstractFilter ge = compose_serial(make_scale(Rat(2), kExact), make_plus(kF64));
  CHECK(ge.eps_rel_T.at(0, 0) == fp::mul_up(2.0, 0x1p-53));
  CHECK(ge.eps_abs[0] == fp::mul_up(2.0, 0x1p-1074));

  // Noisy g after exact f: g's relative error sees l1(f.T).
  AbstractFilter eg = compose_serial(make_scale(Rat(3), kF64), make_scale(Rat(4), kExact));
  CHECK(eg.eps_rel_T.at(0, 0) == fp::mul_up(fp::mul_up(3.0, 0x1p-53), 4.0));
  CHECK(eg.eps_abs[0] == 0x1p-1074);
}

TEST_CASE("serial composition is associative on the exact part") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    RatFunMatrix ta(2, 2), tb(2, 2), tc(2, 2);
    for (size_t r = 0; r < 2; ++r)
      for (size_t c = 0; c < 2; ++c) {
        ta.at(r, c) = rnd_causal(rng);
        tb.at(r, c) = rnd_causal(rng);
        tc.at(r, c) = rnd_causal(rng);
      }
    AbstractFilter a = manual(ta), b = manual(tb), c = manual(tc);
    AbstractFilter left = compose_serial(compose_serial(a, b), c);
    AbstractFilter right = compose_serial(a, compose_serial(b, c));
    CHECK(left.T == right.T);
  }
}

TEST_CASE("feedback closes a delayed loop") {
  // out = in + (9/10) * delayed(out), built from plus after (wire || scale).
  AbstractFilter inner = compose_serial(
      make_plus(kExact), compose_parallel(make_wire(1), make_scale(Rat(9, 10), kExact)));
  AbstractFilter h = compose_feedback(inner, 1);
  CHECK(h.n_in() == 1);
  CHECK(h.n_out() == 1);
  CHECK(h.T.at(0, 0) == RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-9, 10)})));
  CHECK(h.eps_abs[0] == 0.0);  // exact realization: fast path

  // Same loop in ieee64: finite error terms appear.
  AbstractFilter innerf = compose_serial(
      make_plus(kF64), compose_parallel(make_wire(1), make_scale(Rat(9, 10), kF64)));
  AbstractFilter hf = compose_feedback(innerf, 1);
  CHECK(hf.T.at(0, 0) == h.T.at(0, 0));
  CHECK(hf.eps_rel_T.at(0, 0) > 0.0);
  CHECK(std::isfinite(hf.eps_rel_T.at(0, 0)));
  CHECK(hf.eps_rel_T.at(0, 0) < 1e-12);
  CHECK(std::isfinite(hf.eps_abs[0]));

  CHECK_THROWS_AS(compose_feedback(h, 0), std::invalid_argument);
  CHECK_THROWS_AS(compose_feedback(h, 2), std::invalid_argument);
}

TEST_CASE("feedback satisfies the closed-loop equation") {
  std::mt19937_64 rng(4321);
  for (int trial = 0; trial < 10; ++trial) {
    RatFunMatrix t(2, 3);  // 2 outputs, 2 external inputs + 1 fed back
    for (size_t r = 0; r < 2; ++r)
      for (size_t c = 0; c < 3; ++c) t.at(r, c) = rnd_causal(rng);
    AbstractFilter f = manual(t);
    AbstractFilter h = compose_feedback(f, 1);
    REQUIRE(h.n_in() == 2);
    // X = T_I I + z T_fb X_fb with the last output fed back:
    // h.T(r,c) == f.T(r,c) + z f.T(r,2) h.T(1,c).
    RatFun zz(Poly::z(1));
    for (size_t r = 0; r < 2; ++r)
      for (size_t c = 0; c < 2; ++c)
        CHECK(h.T.at(r, c) == t.at(r, c) + zz * t.at(r, 2) * h.T.at(1, c));
  }
}

TEST_CASE("feedback rejects non-contracting error loops") {
  // beta within one ulp of 1: the exact loop 1/(1 - beta z) is stable but
  // l1 ~ 2^25 amplifies the single rounding u = 2^-24 past 1.
  const Rat beta(Rat(1) - Rat(1, 1 << 25));
  AbstractFilter inner = compose_serial(
      make_plus(kF32), compose_parallel(make_wire(1), make_scale(beta, kF32)));
  CHECK_THROWS_WITH_AS(compose_feedback(inner, 1), doctest::Contains("not contracting"),
                       std::domain_error);
}

TEST_CASE("feedback on an exactly unstable loop yields +inf markers") {
  AbstractFilter inner = compose_serial(
      make_plus(kF64), compose_parallel(make_wire(1), make_scale(Rat(1), kF64)));
  AbstractFilter h = compose_feedback(inner, 1);
  // The exact transfer function is still produced...
  CHECK(h.T.at(0, 0) == RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-1)})));
  // ...but no finite realization error exists.
  CHECK(std::isinf(h.eps_abs[0]));
  CHECK(std::isinf(h.eps_rel_T.at(0, 0)));
  auto ob = output_bound(h, {1.0}, {});
  CHECK(!ob[0].bounded);
  CHECK(ob[0].unbounded_entry == "T[0][0]");

  // The exact-format loop has no error terms at all (and stays exact).
  AbstractFilter he = compose_feedback(
      compose_serial(make_plus(kExact),
                     compose_parallel(make_wire(1), make_scale(Rat(1), kExact))),
      1);
  CHECK(he.eps_abs[0] == 0.0);
  CHECK(he.T.at(0, 0) == h.T.at(0, 0));
}

TEST_CASE("quantize: on-grid coefficients are untouched") {
  AbstractFilter f = make_scale(Rat(3, 8), kF64);
  std::string warn;
  AbstractFilter q = quantize(f, 3, {}, &warn);
  CHECK(q.T.at(0, 0) == f.T.at(0, 0));
  CHECK(q.eps_rel_T.at(0, 0) == f.eps_rel_T.at(0, 0));
  CHECK(warn.empty());
}

TEST_CASE("quantize: off-grid coefficients move and pay into eps") {
  AbstractFilter f = make_scale(Rat(1, 3), kExact);
  AbstractFilter q = quantize(f, 8);
  const Rat snapped = q.T.at(0, 0).num().coeff(0);
  CHECK(snapped == Rat(85, 256));  // nearest multiple of 2^-8
  const double moved = abs(Rat(1, 3) - snapped).upper();
  CHECK(q.eps_rel_T.at(0, 0) >= moved);
  CHECK(q.eps_rel_T.at(0, 0) <= 2 * moved);

  // IIR entry: the denominator shift is amplified by both kernels.
  RatFunMatrix t(1, 1);
  t.at(0, 0) = RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-1, 3)}));
  AbstractFilter g = manual(t);
  AbstractFilter qg = quantize(g, 4);
  CHECK(qg.T.at(0, 0).den().coeff(1) == Rat(-5, 16));
  // err >= l1(new) * dQ * l1(1/Q) = (16/11) * (1/48) * (3/2) = 1/22.
  CHECK(qg.eps_rel_T.at(0, 0) >= 1.0 / 22.0);
  CHECK(qg.eps_rel_T.at(0, 0) <= 0.047);
}

TEST_CASE("quantize: entries that cannot re-certify stay exact with a warning") {
  RatFunMatrix t(1, 1);
  t.at(0, 0) = RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-99, 100)}));
  AbstractFilter f = manual(t);
  std::string warn;
  AbstractFilter q = quantize(f, 1, {}, &warn);  // den coeff snaps to -1: unstable
  CHECK(q.T.at(0, 0) == f.T.at(0, 0));
  CHECK(q.eps_rel_T.at(0, 0) == 0.0);
  CHECK(warn.find("T[0][0] left exact") != std::string::npos);

  CHECK_THROWS_AS(quantize(f, 0), std::invalid_argument);
  CHECK_THROWS_AS(quantize(f, 513), std::invalid_argument);
}

TEST_CASE("quantize soundness: snapped kernels obey the paid-for bound") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 10; ++trial) {
    RatFunMatrix t(1, 1);
    Rat q2(1 + static_cast<long>(rng() % 60), 100);
    Rat q1;
    do {
      q1 = Rat(static_cast<long>(rng() % 241) - 120, 100);
    } while (!(q1 * q1 < Rat(4) * q2));
    t.at(0, 0) = RatFun(Poly(std::vector<Rat>{Rat(1), Rat(static_cast<long>(rng() % 7) - 3, 7)}),
                        Poly(std::vector<Rat>{Rat(1), q1, q2}));
    AbstractFilter f = manual(t);
    AbstractFilter q = quantize(f, 16);
    // ||f - f#||_1 <= paid eps: check against exact partial sums of f - f#.
    RatFun diff = t.at(0, 0) - q.T.at(0, 0);
    Rat partial;
    for (const Rat& c : diff.develop(300)) partial += abs(c);
    CHECK(Rat(q.eps_rel_T.at(0, 0)) >= partial);
  }
}

TEST_CASE("output bounds: gains, groups, failures") {
  // FIR gain is exact and scales with the input bound.
  RatFunMatrix t(1, 1);
  t.at(0, 0) = rf({1, 2, -3});
  AbstractFilter f = manual(t);
  CHECK(output_bound(f, {1.0}, {})[0].total == 6.0);
  CHECK(output_bound(f, {2.0}, {})[0].gain == 12.0);
  CHECK(output_bound(f, {0.0}, {})[0].total == 0.0);

  // Cancelling same-label reset columns: fine sees the cancellation.
  AbstractFilter two = compose_serial(
      make_plus(kExact), compose_parallel(make_delay_init(1, "a", Rat(1), kExact),
                                          make_delay_init(1, "a", Rat(-1), kExact)));
  auto ob = output_bound(two, {0.0, 0.0}, {{"a", 1.0}});
  REQUIRE(ob.size() == 1);
  REQUIRE(ob[0].groups.size() == 1);
  CHECK(ob[0].groups[0].fine == 0.0);
  CHECK(ob[0].groups[0].coarse == 2.0);
  CHECK(ob[0].total == 0.0);
  CHECK(ob[0].total_coarse == 2.0);
  CHECK(ob[0].bounded);

  // Unstable transfer entry.
  RatFunMatrix u(1, 1);
  u.at(0, 0) = RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-1)}));
  auto obu = output_bound(manual(u), {1.0}, {});
  CHECK(!obu[0].bounded);
  CHECK(obu[0].unbounded_entry == "T[0][0]");

  // Contract violations.
  CHECK_THROWS_AS(output_bound(f, {}, {}), std::invalid_argument);          // missing input bound
  CHECK_THROWS_AS(output_bound(f, {-1.0}, {}), std::invalid_argument);      // negative bound
  CHECK_THROWS_AS(output_bound(two, {0.0, 0.0}, {}), std::invalid_argument);  // missing label
}

TEST_CASE("entrywise norm matrices") {
  RatFunMatrix m(1, 2);
  m.at(0, 0) = rf({1, 2, -3});
  m.at(0, 1) = RatFun(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-1)}));
  NonnegMatrix l1 = l1_matrix(m);
  CHECK(l1.at(0, 0) == 6.0);
  CHECK(std::isinf(l1.at(0, 1)));
  NonnegMatrix li = linf_matrix(m);
  CHECK(li.at(0, 0) == 3.0);
  CHECK(std::isfinite(li.at(0, 1)));  // sup of partial sums of 1/(1-z) is 1
  CHECK(li.at(0, 1) == 1.0);
}
