// Parsing, printing, analysis driver, reports, empirical check harness.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>

#include "doctest.h"
#include "filtan/analyze.hpp"
#include "filtan/check.hpp"
#include "filtan/network.hpp"
#include "filtan/report.hpp"
#include "filtan/simulate.hpp"
#include "json.hpp"

using namespace filtan;

namespace {

const char* kBiquad = R"(
input i <= 1;
reset ri1 <= 1;
reset ri2 <= 1;
reset ro1 <= 1;
reset ro2 <= 1;
ib1d = delay(ib1, 1, ri1);
ib2d = delay(ib2, 1, ri2);
ob1d = delay(ob1, 1, ro1);
ob2d = delay(ob2, 1, ro2);
y   = 1/2*i - 7/10*ib1d + 2/5*ib2d;
o   = y + 3/2*ob1d - 7/10*ob2d;
ib2 = ib1d;
ib1 = i;
ob2 = ob1d;
ob1 = o;
output o;
)";

const char* kLeakyBlocks = R"(
input u <= 1;
blocks serial(feedback(serial(parallel(wire(1), scale(9/10)),
                              plus,
                              fanout(2)),
                       1),
              route(2 : 1));
output y;
)";

const char* kFilter1 = R"(
input e <= 400;
reset iota <= 400;
e0d = delay(e0, 1, iota);
e1d = delay(e1, 1);
s0d = delay(s0, 1, iota);
s1d = delay(s1, 1);
p  = 0.5*e - 0.7*e0d + 0.4*e1d + 1.5*s0d - 0.7*s1d;
e1 = e0d;
e0 = e;
s1 = s0d;
s0 = p;
x  = 1/6*p + 1/5*s1;
output x;
)";

std::string with_input_bound(const char* src, const std::string& from, const std::string& to) {
  std::string s(src);
  auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("parse: declarations, equations, evaluation order") {
  FilterNetwork net = parse_network(kBiquad);
  REQUIRE(net.inputs.size() == 1);
  CHECK(net.inputs[0].name == "i");
  CHECK(net.inputs[0].has_bound);
  CHECK(net.inputs[0].bound == Rat(1));
  CHECK(net.resets.size() == 4);
  CHECK(net.outputs.size() == 1);
  CHECK(net.equations.size() == 10);
  CHECK(!net.has_blocks);
  CHECK(net.node_index.count("o") == 1);
  CHECK(net.input_index.at("i") == 0);
  CHECK(net.reset_index.at("ro2") == 3);
  // eval_order: every delay-free reference resolves to an earlier equation.
  REQUIRE(net.eval_order.size() == net.equations.size());
  std::map<std::string, size_t> pos;
  for (size_t k = 0; k < net.eval_order.size(); ++k) pos[net.equations[net.eval_order[k]].lhs] = k;
  for (size_t k = 0; k < net.eval_order.size(); ++k)
    for (const Term& t : net.equations[net.eval_order[k]].terms)
      if (t.kind == Term::Kind::node && pos.count(t.name)) CHECK(pos[t.name] < k);
}

TEST_CASE("parse: in-file format selection") {
  FilterNetwork net = parse_network("input e <= 1;\nformat ieee32;\ny = 2*e;\noutput y;\n");
  CHECK(net.has_format);
  CHECK(net.format == "ieee32");
  CHECK(!parse_network("input e <= 1;\ny = e;\noutput y;\n").has_format);
}

TEST_CASE("parse errors carry locations and name the defect") {
  auto fails_with = [](const std::string& src, const char* what) {
    try {
      parse_network(src);
      FAIL_CHECK("expected ParseError for: " << what << "\n" << src);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(what) != std::string::npos);
      CHECK(e.where().line >= 1);
    }
  };
  fails_with("", "no outputs declared");
  fails_with("input e <= 1;\noutput y;\n", "no node equations");
  fails_with("input e <= 1;\ny = e + q;\noutput y;\n", "undeclared name 'q'");
  fails_with("input e <= 1;\ny = e;\ny = 2*e;\noutput y;\n", "multiple assignment of 'y'");
  fails_with("input e <= 1;\ne = e;\noutput e;\n", "assignment to input");
  fails_with("input e <= 1;\ninput e <= 2;\ny = e;\noutput y;\n", "duplicate declaration");
  fails_with("input e <= 1;\ny = x + e;\nx = y;\noutput y;\n", "non-causal");
  fails_with("input e <= 1;\ny = y + e;\noutput y;\n", "non-causal");
  fails_with("input e <= 1;\ny = 1/0*e;\noutput y;\n", "zero denominator");
  fails_with("input e <= 1;\ny = delay(e, 1, nosuch);\noutput y;\n", "undeclared reset");
  fails_with("input e <= -1;\ny = e;\noutput y;\n", "bound must be nonnegative");
  fails_with("input e <= 1;\nblocks serial(plus, plus);\noutput y;\n", "serial stage expects");
  fails_with("input a <= 1;\ninput b <= 1;\nblocks scale(2);\noutput y;\n",
             "blocks expression takes");
  fails_with("input e <= 1;\nblocks wire(1);\ny = e;\noutput y;\n", "cannot be mixed");
  fails_with("input e <= 1;\ny = delay(e);\noutput y;\n", "','");

  // Locations point at the offending line.
  try {
    parse_network("input e <= 1;\ny = e + q;\noutput y;\n");
    FAIL_CHECK("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.where().line == 2);
  }
}

TEST_CASE("print is a fixpoint and parse round-trips, both forms") {
  for (const char* src : {kBiquad, kLeakyBlocks, kFilter1}) {
    std::string once = print_network(parse_network(src));
    std::string twice = print_network(parse_network(once));
    CHECK(once == twice);
  }
  // Scaled inits and bare constants survive the round trip.
  const char* affine =
      "input e <= 800;\nreset iota <= 800;\ns0d = delay(s0, 1, 1/2*iota);\n"
      "s1 = s0d + 10;\ns0 = 1/2*e + 1/3*s1;\ny = 1/10*s1;\noutput y;\n";
  std::string once = print_network(parse_network(affine));
  CHECK(once == print_network(parse_network(once)));
  CHECK(once.find("10") != std::string::npos);
}

TEST_CASE("expand_blocks produces an equivalent equation network") {
  FilterNetwork blocks = parse_network(kLeakyBlocks);
  FilterNetwork eqs = expand_blocks(blocks);
  CHECK(!eqs.has_blocks);
  CHECK(!eqs.equations.empty());
  CHECK(eqs.inputs.size() == 1);
  CHECK(eqs.outputs.size() == 1);
  CHECK(eqs.outputs[0].name == "y");

  Analysis ab = analyze_network(blocks, FloatFormat::exact());
  Analysis ae = analyze_network(eqs, FloatFormat::exact());
  RatFun want(Poly(Rat(1)), Poly(std::vector<Rat>{Rat(1), Rat(-9, 10)}));
  CHECK(ab.filter.T.at(0, 0) == want);
  CHECK(ae.filter.T.at(0, 0) == want);

  // Expansion is idempotent on equation networks.
  FilterNetwork again = expand_blocks(eqs);
  CHECK(print_network(again) == print_network(eqs));
}

TEST_CASE("analyze: leaky integrator gains exactly 10") {
  Analysis a = analyze_network(parse_network(kLeakyBlocks), FloatFormat::exact());
  REQUIRE(a.bounds.size() == 1);
  CHECK(a.bounds[0].bounded);
  CHECK(a.bounds[0].total >= 10.0);
  CHECK(a.bounds[0].total <= 10.0 + 1e-6);
  CHECK(a.bounds[0].eps == 0.0);  // exact format
  CHECK(a.output_names == std::vector<std::string>{"y"});

  // ieee64 realization pays a small, finite rounding term.
  Analysis af = analyze_network(parse_network(kLeakyBlocks), FloatFormat::ieee64());
  CHECK(af.bounds[0].eps > 0.0);
  CHECK(af.bounds[0].eps < 1e-9);
  CHECK(af.bounds[0].total > 10.0);
}

TEST_CASE("analyze: constant feeds are collected") {
  const char* affine =
      "input e <= 1;\ns1 = delay(s0, 1) + 10;\ns0 = 1/2*e + 1/3*delay(s1, 1);\n"
      "y = 1/10*s1;\noutput y;\n";
  Analysis a = analyze_network(parse_network(affine), FloatFormat::exact());
  REQUIRE(a.const_feeds.size() == 1);
  CHECK(a.const_feeds[0].first == "s1");
  CHECK(a.const_feeds[0].second == Rat(10));
  CHECK(a.bounds[0].bounded);
  // The constant column rides a pseudo-reset pinned to 1.
  bool has_const_slot = false;
  for (const ResetSlot& s : a.filter.resets) has_const_slot |= s.constant_one;
  CHECK(has_const_slot);
}

TEST_CASE("analyze: deterministic reports for any job count") {
  FilterNetwork net = parse_network(kFilter1);
  Analysis a1 = analyze_network(net, FloatFormat::ieee64(), {}, 512, 1);
  Analysis a4 = analyze_network(net, FloatFormat::ieee64(), {}, 512, 4);
  CHECK(report_json(a1) == report_json(a4));
  CHECK(a1.bounds[0].total == a4.bounds[0].total);
}

TEST_CASE("analyze: bounds scale linearly with input bounds") {
  Analysis a1 = analyze_network(parse_network(kFilter1), FloatFormat::ieee64());
  Analysis a2 = analyze_network(
      parse_network(with_input_bound(kFilter1, "input e <= 400;", "input e <= 800;").c_str()),
      FloatFormat::ieee64());
  CHECK(a2.bounds[0].gain == 2.0 * a1.bounds[0].gain);
  CHECK(a2.bounds[0].eps <= 2.0 * a1.bounds[0].eps);
  CHECK(a2.bounds[0].eps >= a1.bounds[0].eps);
}

TEST_CASE("analyze: drift fixpoint certificate is re-checkable") {
  Analysis a = analyze_network(parse_network(kFilter1), FloatFormat::ieee64());
  REQUIRE(a.has_fixpoint);
  CHECK(a.drift_contracting);
  CHECK(a.k1_norm < 1.0);
  CHECK(a.k1_norm > 0.0);
  REQUIRE(!a.fix_B.empty());
  REQUIRE(a.fix_y.size() == a.fix_B.size());
  for (size_t c = 0; c < a.fix_B.size(); ++c) {
    const auto& y = a.fix_y[c];
    const auto& B = a.fix_B[c];
    REQUIRE(y.size() == B.size());
    std::vector<double> kb = mul_up(a.k1, B);
    for (size_t r = 0; r < B.size(); ++r) CHECK(fp::add_up(kb[r], y[r]) <= B[r]);
  }
}

TEST_CASE("float format parsing") {
  FloatFormat fx = FloatFormat::parse("fixed:0.125:rne");
  CHECK(fx.kind == FloatFormat::Kind::fixed);
  CHECK(fx.quantum == 0.125);
  CHECK(fx.eps_abs == 0.0625);
  CHECK(fx.eps_rel == 0.0);
  CHECK(FloatFormat::parse("fixed:0.125").eps_abs == 0.125);  // truncating
  CHECK(FloatFormat::parse("ieee32").eps_rel == 0x1p-24);
  CHECK(FloatFormat::parse("ieee64").eps_abs == 0x1p-1074);
  CHECK(FloatFormat::parse("exact").eps_rel == 0.0);
  CHECK_THROWS_AS(FloatFormat::parse("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(FloatFormat::parse("fixed:0"), std::invalid_argument);
  CHECK_THROWS_AS(FloatFormat::parse("fixed:-1"), std::invalid_argument);
  for (const char* s : {"exact", "ieee32", "ieee64", "fixed:0.125:rne", "fixed:0.5"}) {
    FloatFormat f = FloatFormat::parse(s);
    CHECK(FloatFormat::parse(f.to_string()).to_string() == f.to_string());
  }
}

TEST_CASE("simulate: exact impulse responses reproduce transfer columns") {
  FilterNetwork net = parse_network(kBiquad);
  Analysis a = analyze_network(net, FloatFormat::exact());
  const size_t steps = 24;
  std::vector<Rat> impulse(steps);
  impulse[0] = Rat(1);
  std::map<std::string, Rat> zero{{"ri1", Rat(0)}, {"ri2", Rat(0)}, {"ro1", Rat(0)}, {"ro2", Rat(0)}};
  auto out = simulate_exact(net, {impulse}, zero, steps);
  REQUIRE(out.size() == 1);
  std::vector<Rat> want = a.filter.T.at(0, 0).develop(steps - 1);
  REQUIRE(out[0].size() == steps);
  for (size_t k = 0; k < steps; ++k) CHECK(out[0][k] == want[k]);

  // Reset responses: zero input, one reset pinned to 1.
  std::map<std::string, Rat> r1 = zero;
  r1["ro1"] = Rat(1);
  auto outr = simulate_exact(net, {std::vector<Rat>(steps)}, r1, steps);
  size_t slot = 2;  // ro1 is the third declared reset
  REQUIRE(a.filter.n_reset() == 4);
  std::vector<Rat> wantr = a.filter.D.at(0, slot).develop(steps - 1);
  for (size_t k = 0; k < steps; ++k) CHECK(outr[0][k] == wantr[k]);
}

TEST_CASE("simulate: FIR echo and binary64 agreement") {
  FilterNetwork net = parse_network("input e <= 1;\ny = e + 2*delay(e, 1);\noutput y;\n");
  std::vector<Rat> impulse{Rat(1), Rat(0), Rat(0), Rat(0)};
  auto out = simulate_exact(net, {impulse}, {}, 4);
  CHECK(out[0] == std::vector<Rat>{Rat(1), Rat(2), Rat(0), Rat(0)});

  auto outd = simulate_binary64(net, {{1.0, 0.0, 0.0, 0.0}}, {}, 4);
  CHECK(outd[0] == std::vector<double>{1.0, 2.0, 0.0, 0.0});

  FilterNetwork biq = parse_network(kBiquad);
  std::map<std::string, double> rd{{"ri1", 0.25}, {"ri2", -1.0}, {"ro1", 0.5}, {"ro2", 1.0}};
  std::map<std::string, Rat> rr{{"ri1", Rat(1, 4)}, {"ri2", Rat(-1)}, {"ro1", Rat(1, 2)}, {"ro2", Rat(1)}};
  std::vector<double> ind(32);
  std::vector<Rat> inr(32);
  for (size_t k = 0; k < 32; ++k) {
    ind[k] = (k % 3 == 0) ? 0.5 : -0.25;
    inr[k] = Rat(ind[k]);
  }
  auto od = simulate_binary64(biq, {ind}, rd, 32);
  auto oe = simulate_exact(biq, {inr}, rr, 32);
  for (size_t k = 0; k < 32; ++k)
    CHECK(std::abs(od[0][k] - oe[0][k].to_double()) <= 1e-12 * (1.0 + std::abs(od[0][k])));
}

TEST_CASE("check: certified bounds survive simulation, tampered bounds do not") {
  FilterNetwork net = parse_network(kBiquad);
  Analysis a = analyze_network(net, FloatFormat::ieee64());
  CheckResult ok = check_network(net, a, 1000, 7);
  CHECK(ok.passed);
  CHECK(ok.violations.empty());
  CHECK(ok.worst_ratio > 0.0);
  CHECK(ok.worst_ratio <= 1.0);
  CHECK(ok.to_string().find("no violations") != std::string::npos);

  Analysis bad = a;
  bad.bounds[0].total = ok.worst_ratio * bad.bounds[0].total / 2.0;
  CheckResult fail = check_network(net, bad, 1000, 7);
  CHECK(!fail.passed);
  REQUIRE(!fail.violations.empty());
  CHECK(fail.violations[0].output == "o");
  CHECK(fail.violations[0].value > fail.violations[0].bound);
  CHECK(!fail.violations[0].trace_prefix.empty());
  CHECK(fail.to_string().find("VIOLATION") != std::string::npos);

  Analysis ex = analyze_network(net, FloatFormat::exact());
  CHECK_THROWS_AS(check_network(net, ex, 10, 1), std::invalid_argument);
}

TEST_CASE("reports: JSON is exact, deterministic, and clock-free") {
  Analysis a = analyze_network(parse_network(kFilter1), FloatFormat::ieee64());
  std::string js = report_json(a);
  CHECK(js.find("elapsed") == std::string::npos);

  auto j = nlohmann::json::parse(js);
  CHECK(j["verdict"] == "bounded");
  CHECK(j["format"] == "ieee64");
  CHECK(j["inputs"][0]["name"] == "e");
  CHECK(j["outputs"][0]["name"] == "x");
  // Denominator 1 - 3/2 z + 7/10 z^2, integer-scaled.
  auto den = j["outputs"][0]["transfer"][0]["den_integer_scaled"];
  REQUIRE(den.size() == 3);
  CHECK(den[0] == "10");
  CHECK(den[1] == "-15");
  CHECK(den[2] == "7");
  // Every numeric value carries a consistent dec/hex pair.
  auto total = j["outputs"][0]["bound"]["total"];
  double dec = std::strtod(total["dec"].get<std::string>().c_str(), nullptr);
  double hex = std::strtod(total["hex"].get<std::string>().c_str(), nullptr);
  CHECK(dec == hex);
  CHECK(dec == a.bounds[0].total);
  auto l1 = j["outputs"][0]["transfer"][0]["l1"];
  CHECK(std::strtod(l1["dec"].get<std::string>().c_str(), nullptr) ==
        std::strtod(l1["hex"].get<std::string>().c_str(), nullptr));
  CHECK(j["drift"]["modeled"] == true);
  CHECK(j["drift"]["contracting"] == true);

  std::string txt = report_text(a);
  CHECK(txt.find("verdict: bounded") != std::string::npos);
  CHECK(txt.find("elapsed") != std::string::npos);
}

TEST_CASE("reports: unstable networks are reported, not crashed on") {
  const char* unstable = "input e <= 1;\ny = e + delay(y, 1);\noutput y;\n";
  Analysis a = analyze_network(parse_network(unstable), FloatFormat::ieee64());
  CHECK(!a.bounds[0].bounded);
  CHECK(a.bounds[0].unbounded_entry == "T[0][0]");
  auto j = nlohmann::json::parse(report_json(a));
  CHECK(j["verdict"] == "unbounded");
  CHECK(report_text(a).find("verdict: unbounded") != std::string::npos);
}
