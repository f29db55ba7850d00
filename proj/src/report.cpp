#include "filtan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace filtan {

namespace {

using ordered_json = nlohmann::ordered_json;

// Both renderings of one double: decimal round-trip and exact hex bits.
ordered_json num2(double x) {
  char dec[64], hex[64];
  std::snprintf(dec, sizeof dec, "%.17g", x);
  std::snprintf(hex, sizeof hex, "%a", x);
  return ordered_json{{"dec", dec}, {"hex", hex}};
}

ordered_json opt_bound(bool has, double x) {
  if (!has) return nullptr;
  return num2(x);
}

// Denominator coefficients cleared to integers (times the lcm of the
// denominators), most useful for eyeballing, e.g. 1 - 3/2 z + 7/10 z^2
// becomes ["10", "-15", "7"].
std::vector<std::string> integer_scaled(const Poly& den) {
  mpz_class l(1);
  for (const Rat& c : den.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.den().get_mpz_t());
  std::vector<std::string> out;
  for (const Rat& c : den.coeffs()) {
    mpz_class v = c.num() * (l / c.den());
    out.push_back(v.get_str());
  }
  return out;
}

ordered_json kernel_json(const RatFun& f, const KernelBound& k) {
  ordered_json j;
  j["num"] = f.num().to_string();
  j["den"] = f.den().to_string();
  j["den_integer_scaled"] = integer_scaled(f.den());
  j["l1"] = num2(k.l1_upper);
  j["linf"] = num2(k.linf_upper);
  j["stability"] = to_string(k.stability);
  j["dev_len"] = k.dev_len;
  j["tail"] = to_string(k.method);
  j["strip_one_minus_z"] = k.strip_one_minus_z;
  ordered_json roots = ordered_json::array();
  for (const RootEnclosure& r : k.den_roots) {
    roots.push_back(ordered_json{{"re", num2(r.center.real())},
                                 {"im", num2(r.center.imag())},
                                 {"radius", num2(r.radius)},
                                 {"modulus_lower", num2(r.modulus_lower)}});
  }
  j["den_roots"] = roots;
  j["note"] = k.note;
  return j;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

std::string report_json(const Analysis& a) {
  ordered_json j;
  j["tool"] = ordered_json{{"name", "filtan"}, {"version", "0.1.0"}};
  j["format"] = a.fmt.to_string();
  j["options"] = ordered_json{{"dev_max", a.cfg.n_max},
                              {"degree_cap", a.cfg.degree_cap},
                              {"quantize_bits", a.quantize_budget}};

  ordered_json inputs = ordered_json::array();
  for (std::size_t i = 0; i < a.input_names.size(); ++i) {
    bool has = std::isfinite(a.in_bounds[i]);
    inputs.push_back(
        ordered_json{{"name", a.input_names[i]}, {"bound", opt_bound(has, a.in_bounds[i])}});
  }
  j["inputs"] = inputs;

  ordered_json resets = ordered_json::array();
  for (const auto& [label, bound] : a.reset_bounds) {
    bool has = std::isfinite(bound);
    resets.push_back(ordered_json{{"label", label}, {"bound", opt_bound(has, bound)}});
  }
  j["resets"] = resets;
  j["reset_slots"] = a.slot_desc;

  ordered_json feeds = ordered_json::array();
  for (const auto& [node, value] : a.const_feeds)
    feeds.push_back(ordered_json{{"node", node}, {"value", value.to_string()}});
  j["const_feeds"] = feeds;

  bool all_bounded = true;
  ordered_json outputs = ordered_json::array();
  for (std::size_t i = 0; i < a.output_names.size(); ++i) {
    const OutputBound& b = a.bounds[i];
    ordered_json o;
    o["name"] = a.output_names[i];
    ordered_json transfer = ordered_json::array();
    for (std::size_t c = 0; c < a.filter.n_in(); ++c)
      transfer.push_back(kernel_json(a.filter.T.at(i, c), b.t_kernels[c]));
    o["transfer"] = transfer;
    ordered_json response = ordered_json::array();
    for (std::size_t c = 0; c < a.filter.n_reset(); ++c)
      response.push_back(kernel_json(a.filter.D.at(i, c), b.d_kernels[c]));
    o["reset_response"] = response;

    ordered_json err;
    ordered_json rel_in = ordered_json::array();
    for (std::size_t c = 0; c < a.filter.n_in(); ++c)
      rel_in.push_back(num2(a.filter.eps_rel_T.at(i, c)));
    ordered_json rel_rd = ordered_json::array();
    for (std::size_t c = 0; c < a.filter.n_reset(); ++c)
      rel_rd.push_back(num2(a.filter.eps_rel_D.at(i, c)));
    err["rel_input"] = rel_in;
    err["rel_reset"] = rel_rd;
    err["abs"] = num2(a.filter.eps_abs[i]);
    o["error"] = err;

    ordered_json groups = ordered_json::array();
    for (const GroupBound& g : b.groups)
      groups.push_back(ordered_json{{"label", g.label},
                                    {"magnitude", num2(g.magnitude)},
                                    {"fine", num2(g.fine)},
                                    {"coarse", num2(g.coarse)}});
    o["bound"] = ordered_json{{"bounded", b.bounded},
                              {"gain", num2(b.gain)},
                              {"reset_fine", num2(b.reset_fine)},
                              {"reset_coarse", num2(b.reset_coarse)},
                              {"eps", num2(b.eps)},
                              {"total", num2(b.total)},
                              {"total_coarse", num2(b.total_coarse)},
                              {"unbounded_entry", b.unbounded_entry},
                              {"groups", groups}};
    outputs.push_back(o);
    all_bounded = all_bounded && b.bounded;
  }
  j["outputs"] = outputs;

  j["drift"] = ordered_json{{"modeled", a.has_fixpoint},
                            {"contracting", a.drift_contracting},
                            {"k1_norm", num2(a.k1_norm)}};
  j["warnings"] = split_lines(a.warnings);
  j["verdict"] = all_bounded ? "bounded" : "unbounded";
  return j.dump(2) + "\n";
}

std::string report_text(const Analysis& a) {
  std::ostringstream os;
  char buf[64];
  auto fmt_num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
  };
  os << "filtan analysis (" << a.fmt.to_string() << ")\n";
  for (std::size_t i = 0; i < a.input_names.size(); ++i) {
    os << "input " << a.input_names[i];
    if (std::isfinite(a.in_bounds[i])) os << "  |.| <= " << fmt_num(a.in_bounds[i]);
    os << "\n";
  }
  for (const auto& [label, bound] : a.reset_bounds) {
    os << "reset " << label;
    if (std::isfinite(bound)) os << "  |.| <= " << fmt_num(bound);
    os << "\n";
  }
  for (const auto& [node, value] : a.const_feeds)
    os << "constant feed at " << node << ": " << value.to_string() << " per step\n";

  bool all_bounded = true;
  for (std::size_t i = 0; i < a.output_names.size(); ++i) {
    const OutputBound& b = a.bounds[i];
    os << "\noutput " << a.output_names[i] << ":\n";
    for (std::size_t c = 0; c < a.filter.n_in(); ++c) {
      const KernelBound& k = b.t_kernels[c];
      os << "  transfer from " << a.input_names[c] << ": " << a.filter.T.at(i, c).to_string()
         << "\n    l1 <= " << fmt_num(k.l1_upper) << "  (" << to_string(k.stability)
         << ", head " << k.dev_len << ", tail " << to_string(k.method) << ")\n";
      for (const RootEnclosure& r : k.den_roots)
        os << "    den root near " << fmt_num(r.center.real()) << (r.center.imag() < 0 ? " - " : " + ")
           << fmt_num(std::abs(r.center.imag())) << "i  |root| >= " << fmt_num(r.modulus_lower)
           << "\n";
      if (!k.note.empty()) os << "    note: " << k.note << "\n";
    }
    for (std::size_t c = 0; c < a.filter.n_reset(); ++c) {
      const KernelBound& k = b.d_kernels[c];
      os << "  reset response " << a.slot_desc[c] << ": " << a.filter.D.at(i, c).to_string()
         << "\n    linf <= " << fmt_num(k.linf_upper) << "  (" << to_string(k.stability) << ")\n";
      if (!k.note.empty()) os << "    note: " << k.note << "\n";
    }
    os << "  rounding: abs <= " << fmt_num(a.filter.eps_abs[i]);
    double rel_max = 0.0;
    for (std::size_t c = 0; c < a.filter.n_in(); ++c)
      rel_max = std::max(rel_max, a.filter.eps_rel_T.at(i, c));
    os << ", max rel(input) <= " << fmt_num(rel_max) << "\n";
    if (b.bounded) {
      os << "  |" << a.output_names[i] << "| <= " << fmt_num(b.total) << "   (gain "
         << fmt_num(b.gain) << " + resets " << fmt_num(b.reset_fine) << " + rounding "
         << fmt_num(b.eps) << ")\n";
      os << "  without reset sharing: " << fmt_num(b.total_coarse) << "\n";
    } else {
      os << "  UNBOUNDED";
      if (!b.unbounded_entry.empty()) os << "  (first failing kernel: " << b.unbounded_entry << ")";
      os << "\n";
      all_bounded = false;
    }
  }

  if (a.has_fixpoint)
    os << "\nrounding drift " << (a.drift_contracting ? "contracting" : "NOT contracting")
       << " (|K1| = " << fmt_num(a.k1_norm) << ")\n";
  for (const std::string& w : split_lines(a.warnings)) os << "warning: " << w << "\n";
  os << "verdict: " << (all_bounded ? "bounded" : "unbounded") << "\n";
  os << "elapsed: " << fmt_num(a.elapsed_seconds) << " s\n";
  return os.str();
}

}  // namespace filtan
