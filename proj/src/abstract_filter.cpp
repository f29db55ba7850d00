#include "filtan/abstract_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace filtan {

namespace {

bool is_pow2_magnitude(const Rat& k) {
  if (k.is_zero()) return false;
  mpz_class n = ::abs(k.num()), d = k.den();
  return mpz_popcount(n.get_mpz_t()) == 1 && mpz_popcount(d.get_mpz_t()) == 1;
}

bool has_eps(const AbstractFilter& f);

}  // namespace

std::pair<double, double> scale_error(const Rat& k, const FloatFormat& fmt) {
  switch (fmt.kind) {
    case FloatFormat::Kind::exact:
      return {0.0, 0.0};
    case FloatFormat::Kind::fixed:
      // Integer factors keep fixed-point values on the grid.
      return k.den() == 1 ? std::pair{0.0, 0.0} : std::pair{0.0, fmt.eps_abs};
    default:
      break;
  }
  if (k.is_zero()) return {0.0, 0.0};
  if (is_pow2_magnitude(k)) {
    // Power-of-two scalings are exact in binary floating point except for
    // bits lost below the subnormal floor when |k| < 1.
    return {0.0, abs(k) >= Rat(1) ? 0.0 : fmt.eps_abs};
  }
  return {fp::mul_up(fmt.eps_rel, abs(k).upper()), fmt.eps_abs};
}

double representation_error(const Rat& c, const FloatFormat& fmt) {
  switch (fmt.kind) {
    case FloatFormat::Kind::exact:
      return 0.0;
    case FloatFormat::Kind::ieee64:
      return abs(Rat(c.to_double()) - c).upper();
    case FloatFormat::Kind::ieee32: {
      double wide = c.to_double();
      return abs(Rat(static_cast<double>(static_cast<float>(wide))) - c).upper();
    }
    case FloatFormat::Kind::fixed: {
      Rat q = c / Rat(fmt.quantum);
      return q.den() == 1 ? 0.0 : fmt.eps_abs;
    }
  }
  return fmt.eps_abs;
}

namespace {

bool has_eps(const AbstractFilter& f) {
  for (size_t r = 0; r < f.eps_rel_T.rows(); ++r)
    for (size_t c = 0; c < f.eps_rel_T.cols(); ++c)
      if (f.eps_rel_T.at(r, c) != 0.0) return true;
  for (size_t r = 0; r < f.eps_rel_D.rows(); ++r)
    for (size_t c = 0; c < f.eps_rel_D.cols(); ++c)
      if (f.eps_rel_D.at(r, c) != 0.0) return true;
  for (double a : f.eps_abs)
    if (a != 0.0) return true;
  return false;
}

std::vector<double> add_up_vec(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = fp::add_up(a[i], b[i]);
  return r;
}

void cap_entries(const RatFunMatrix& m, size_t cap) {
  for (size_t r = 0; r < m.rows(); ++r)
    for (size_t c = 0; c < m.cols(); ++c) check_degree_cap(m.at(r, c), cap);
}

}  // namespace

void AbstractFilter::validate() const {
  const size_t no = T.rows(), ni = T.cols(), nr = D.cols();
  if (D.rows() != no || eps_rel_T.rows() != no || eps_rel_T.cols() != ni ||
      eps_rel_D.rows() != no || eps_rel_D.cols() != nr || eps_abs.size() != no ||
      resets.size() != nr)
    throw std::logic_error("abstract filter shape mismatch");
}

AbstractFilter make_plus(const FloatFormat& fmt) {
  AbstractFilter f;
  f.T = RatFunMatrix(1, 2);
  f.T.at(0, 0) = RatFun(Poly(std::vector<Rat>{1}));
  f.T.at(0, 1) = f.T.at(0, 0);
  f.D = RatFunMatrix(1, 0);
  f.eps_rel_T = NonnegMatrix(1, 2);
  f.eps_rel_D = NonnegMatrix(1, 0);
  // One rounded addition: |fl(x+y) - (x+y)| <= eps_rel*(|x|+|y|) + eps_abs.
  if (fmt.kind == FloatFormat::Kind::ieee32 || fmt.kind == FloatFormat::Kind::ieee64) {
    f.eps_rel_T.set(0, 0, fmt.eps_rel);
    f.eps_rel_T.set(0, 1, fmt.eps_rel);
  }
  f.eps_abs = {fmt.kind == FloatFormat::Kind::exact ? 0.0 : fmt.eps_abs};
  return f;
}

AbstractFilter make_scale(const Rat& k, const FloatFormat& fmt) {
  AbstractFilter f;
  f.T = RatFunMatrix(1, 1);
  f.T.at(0, 0) = RatFun(Poly(std::vector<Rat>{k}));
  f.D = RatFunMatrix(1, 0);
  f.eps_rel_T = NonnegMatrix(1, 1);
  f.eps_rel_D = NonnegMatrix(1, 0);
  // One rounded multiplication: |k|*eps_rel relative plus eps_abs absolute.
  switch (fmt.kind) {
    case FloatFormat::Kind::exact:
      f.eps_abs = {0.0};
      break;
    case FloatFormat::Kind::fixed:
      f.eps_abs = {fmt.eps_abs};
      break;
    default:
      f.eps_rel_T.set(0, 0, fp::mul_up(fmt.eps_rel, abs(k).upper()));
      f.eps_abs = {fmt.eps_abs};
      break;
  }
  return f;
}

AbstractFilter make_delay(size_t n) {
  AbstractFilter f;
  f.T = RatFunMatrix(1, 1);
  f.T.at(0, 0) = RatFun(Poly::z(n));
  f.D = RatFunMatrix(1, 0);
  f.eps_rel_T = NonnegMatrix(1, 1);
  f.eps_rel_D = NonnegMatrix(1, 0);
  f.eps_abs = {0.0};
  return f;
}

AbstractFilter make_delay_init(size_t n, const std::string& label, const Rat& scale,
                               const FloatFormat& fmt) {
  if (n == 0) throw std::invalid_argument("initialized delay needs at least one step");
  AbstractFilter f;
  f.T = RatFunMatrix(1, 1);
  f.T.at(0, 0) = RatFun(Poly::z(n));
  f.D = RatFunMatrix(1, 1);
  // The n cells all hold scale * <label>, emitted at steps 0 .. n-1.
  std::vector<Rat> resp(n, scale);
  f.D.at(0, 0) = RatFun(Poly(resp));
  f.eps_rel_T = NonnegMatrix(1, 1);
  f.eps_rel_D = NonnegMatrix(1, 1);
  auto [rel, abs_] = scale_error(scale, fmt);
  f.eps_rel_D.set(0, 0, rel);  // error of loading scale * value at reset
  f.eps_abs = {abs_};
  f.resets = {{label, false}};
  return f;
}

AbstractFilter make_constant_source(const Rat& c, const FloatFormat& fmt) {
  AbstractFilter f;
  f.T = RatFunMatrix(1, 0);
  f.D = RatFunMatrix(1, 1);
  f.D.at(0, 0) = RatFun(Poly(std::vector<Rat>{c}), Poly(std::vector<Rat>{1, -1}));
  f.eps_rel_T = NonnegMatrix(1, 0);
  f.eps_rel_D = NonnegMatrix(1, 1);
  // The realized source emits the format's nearest representable value.
  f.eps_abs = {representation_error(c, fmt)};
  f.resets = {{"1", true}};
  return f;
}

AbstractFilter make_route(size_t n_out, size_t n_in,
                          const std::vector<std::vector<int>>& entries) {
  if (entries.size() != n_out) throw std::invalid_argument("route: row count mismatch");
  AbstractFilter f;
  f.T = RatFunMatrix(n_out, n_in);
  for (size_t r = 0; r < n_out; ++r) {
    if (entries[r].size() != n_in) throw std::invalid_argument("route: column count mismatch");
    size_t nonzero = 0;
    for (size_t c = 0; c < n_in; ++c) {
      int v = entries[r][c];
      if (v == 0) continue;
      if (v != 1 && v != -1) throw std::invalid_argument("route entries must be -1, 0 or 1");
      ++nonzero;
      f.T.at(r, c) = RatFun(Poly(std::vector<Rat>{Rat(v)}));
    }
    if (nonzero > 1)
      throw std::invalid_argument("route rows must select at most one signal (sums round)");
  }
  f.D = RatFunMatrix(n_out, 0);
  f.eps_rel_T = NonnegMatrix(n_out, n_in);
  f.eps_rel_D = NonnegMatrix(n_out, 0);
  f.eps_abs.assign(n_out, 0.0);
  return f;
}

AbstractFilter make_wire(size_t n) {
  std::vector<std::vector<int>> e(n, std::vector<int>(n, 0));
  for (size_t i = 0; i < n; ++i) e[i][i] = 1;
  return make_route(n, n, e);
}

AbstractFilter make_fanout(size_t copies) {
  std::vector<std::vector<int>> e(copies, std::vector<int>{1});
  return make_route(copies, 1, e);
}

AbstractFilter compose_parallel(const AbstractFilter& a, const AbstractFilter& b) {
  a.validate();
  b.validate();
  AbstractFilter f;
  const size_t no = a.n_out() + b.n_out(), ni = a.n_in() + b.n_in(),
               nr = a.n_reset() + b.n_reset();
  f.T = RatFunMatrix(no, ni);
  f.D = RatFunMatrix(no, nr);
  f.eps_rel_T = NonnegMatrix(no, ni);
  f.eps_rel_D = NonnegMatrix(no, nr);
  f.eps_abs.assign(no, 0.0);
  for (size_t r = 0; r < a.n_out(); ++r) {
    for (size_t c = 0; c < a.n_in(); ++c) {
      f.T.at(r, c) = a.T.at(r, c);
      f.eps_rel_T.set(r, c, a.eps_rel_T.at(r, c));
    }
    for (size_t c = 0; c < a.n_reset(); ++c) {
      f.D.at(r, c) = a.D.at(r, c);
      f.eps_rel_D.set(r, c, a.eps_rel_D.at(r, c));
    }
    f.eps_abs[r] = a.eps_abs[r];
  }
  for (size_t r = 0; r < b.n_out(); ++r) {
    for (size_t c = 0; c < b.n_in(); ++c) {
      f.T.at(a.n_out() + r, a.n_in() + c) = b.T.at(r, c);
      f.eps_rel_T.set(a.n_out() + r, a.n_in() + c, b.eps_rel_T.at(r, c));
    }
    for (size_t c = 0; c < b.n_reset(); ++c) {
      f.D.at(a.n_out() + r, a.n_reset() + c) = b.D.at(r, c);
      f.eps_rel_D.set(a.n_out() + r, a.n_reset() + c, b.eps_rel_D.at(r, c));
    }
    f.eps_abs[a.n_out() + r] = b.eps_abs[r];
  }
  f.resets = a.resets;
  f.resets.insert(f.resets.end(), b.resets.begin(), b.resets.end());
  return f;
}

AbstractFilter compose_serial(const AbstractFilter& g, const AbstractFilter& f,
                              const BoundConfig& cfg) {
  g.validate();
  f.validate();
  if (g.n_in() != f.n_out())
    throw std::invalid_argument("serial composition: inner dimensions disagree");

  AbstractFilter h;
  h.T = g.T * f.T;
  h.D = RatFunMatrix::hcat(g.T * f.D, g.D);
  cap_entries(h.T, cfg.degree_cap);
  cap_entries(h.D, cfg.degree_cap);
  h.resets = f.resets;
  h.resets.insert(h.resets.end(), g.resets.begin(), g.resets.end());

  // g receives f's rounded output: split the error into g amplifying f's
  // drift (through N1(g) + eps_g) and g's own rounding applied to a signal
  // as large as f's exact output plus that drift.
  const bool f_eps = has_eps(f);
  bool g_relT = false;
  for (size_t r = 0; r < g.eps_rel_T.rows() && !g_relT; ++r)
    for (size_t c = 0; c < g.eps_rel_T.cols(); ++c)
      if (g.eps_rel_T.at(r, c) != 0.0) { g_relT = true; break; }

  NonnegMatrix amp = g.eps_rel_T;
  if (f_eps) amp = add_up(l1_matrix(g.T, cfg), g.eps_rel_T);

  if (f_eps || g_relT) {
    NonnegMatrix relT = mul_up(amp, f.eps_rel_T);
    NonnegMatrix relD = mul_up(amp, f.eps_rel_D);
    if (g_relT) {
      relT = add_up(relT, mul_up(g.eps_rel_T, l1_matrix(f.T, cfg)));
      relD = add_up(relD, mul_up(g.eps_rel_T, linf_matrix(f.D, cfg)));
    }
    h.eps_rel_T = relT;
    h.eps_rel_D = NonnegMatrix::hcat(relD, g.eps_rel_D);
    h.eps_abs = add_up_vec(mul_up(amp, f.eps_abs), g.eps_abs);
  } else {
    h.eps_rel_T = NonnegMatrix(g.n_out(), f.n_in());
    h.eps_rel_D = NonnegMatrix(g.n_out(), h.D.cols());
    h.eps_abs.assign(g.n_out(), 0.0);
  }
  return h;
}

AbstractFilter compose_feedback(const AbstractFilter& f, size_t n_fb, const BoundConfig& cfg) {
  f.validate();
  if (n_fb == 0) throw std::invalid_argument("feedback: need at least one fed-back signal");
  if (n_fb > f.n_in() || n_fb > f.n_out())
    throw std::invalid_argument("feedback: more loops than inputs or outputs");
  const size_t no = f.n_out(), n_ext = f.n_in() - n_fb;

  // Output no-n_fb+k drives input n_ext+k through a zero-initialized unit
  // delay, so the closed loop solves X = T_I I + (z G_fb) X + D R.
  RatFunMatrix G_fb(no, no);
  for (size_t k = 0; k < n_fb; ++k)
    for (size_t r = 0; r < no; ++r) G_fb.at(r, no - n_fb + k) = f.T.at(r, n_ext + k);
  RatFunMatrix Minv = invert_id_minus_zA(G_fb);

  AbstractFilter h;
  h.T = Minv * f.T.columns(0, n_ext);
  h.D = Minv * f.D;
  cap_entries(h.T, cfg.degree_cap);
  cap_entries(h.D, cfg.degree_cap);
  h.resets = f.resets;

  if (!has_eps(f)) {
    h.eps_rel_T = NonnegMatrix(no, n_ext);
    h.eps_rel_D = NonnegMatrix(no, f.n_reset());
    h.eps_abs.assign(no, 0.0);
    return h;
  }

  NonnegMatrix A = l1_matrix(Minv, cfg);
  NonnegMatrix eps_O_emb(no, no);
  for (size_t k = 0; k < n_fb; ++k)
    for (size_t r = 0; r < no; ++r)
      eps_O_emb.set(r, no - n_fb + k, f.eps_rel_T.at(r, n_ext + k));
  NonnegMatrix K1 = mul_up(A, eps_O_emb);

  if (!K1.all_finite() || !A.all_finite()) {
    // The exact loop is not certifiably stable; the transfer matrix is still
    // exact but no finite rounding-error bound exists.
    h.eps_rel_T = NonnegMatrix(no, n_ext, fp::kInf);
    h.eps_rel_D = NonnegMatrix(no, f.n_reset(), fp::kInf);
    h.eps_abs.assign(no, fp::kInf);
    return h;
  }
  if (!(subordinate_inf_norm(K1) < 1.0))
    throw std::domain_error("floating-point feedback not contracting");

  // Injected per-step error e obeys
  //   |e| <= eps_I |I| + eps_D |R| + eps_abs + eps_O |X~_fb|,
  // and the realized state satisfies |X~| <= N1(T) |I| + Ninf(D) |R| + A|e|,
  // so E = A|e| is bounded by the least fixpoint of E = K1 E + A y.
  NonnegMatrix eps_I = f.eps_rel_T.columns(0, n_ext);
  NonnegMatrix yT = add_up(eps_I, mul_up(eps_O_emb, l1_matrix(h.T, cfg)));
  NonnegMatrix yD = add_up(f.eps_rel_D, mul_up(eps_O_emb, linf_matrix(h.D, cfg)));

  auto fix_columns = [&](const NonnegMatrix& y) {
    NonnegMatrix out(no, y.cols());
    for (size_t c = 0; c < y.cols(); ++c) {
      std::vector<double> col(no);
      for (size_t r = 0; r < no; ++r) col[r] = y.at(r, c);
      std::vector<double> b = fixpoint_upper_bound(K1, mul_up(A, col));
      for (size_t r = 0; r < no; ++r) out.set(r, c, b[r]);
    }
    return out;
  };
  h.eps_rel_T = fix_columns(yT);
  h.eps_rel_D = fix_columns(yD);
  h.eps_abs = fixpoint_upper_bound(K1, mul_up(A, f.eps_abs));
  return h;
}

AbstractFilter quantize(const AbstractFilter& f, unsigned bits, const BoundConfig& cfg,
                        std::string* warning) {
  f.validate();
  if (bits == 0 || bits > 512) throw std::invalid_argument("quantize: bits must be in 1..512");
  mpz_class grid = 1;
  grid <<= bits;

  auto snap = [&](const Rat& c) {
    // Nearest multiple of 2^-bits (ties toward +inf).
    mpz_class n = c.num() * grid, d = c.den();
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), mpz_class(2 * n + d).get_mpz_t(), mpz_class(2 * d).get_mpz_t());
    return Rat(q, grid);
  };

  AbstractFilter h = f;
  auto process = [&](RatFunMatrix& m, NonnegMatrix& eps, const char* name) {
    for (size_t r = 0; r < m.rows(); ++r)
      for (size_t c = 0; c < m.cols(); ++c) {
        const RatFun& e = m.at(r, c);
        if (e.is_zero()) continue;
        std::vector<Rat> pq, qq;
        Rat dp, dq;
        for (int i = 0; i <= e.num().degree(); ++i) {
          Rat s = snap(e.num().coeff(i));
          dp += abs(s - e.num().coeff(i));
          pq.push_back(s);
        }
        qq.push_back(e.den().coeff(0));  // stays 1: keeps the kernel causal
        for (int i = 1; i <= e.den().degree(); ++i) {
          Rat s = snap(e.den().coeff(i));
          dq += abs(s - e.den().coeff(i));
          qq.push_back(s);
        }
        if (dp.is_zero() && dq.is_zero()) continue;
        RatFun snapped{Poly(pq), Poly(qq)};
        // ||e - e#||_1 <= dP l1(1/Q) + l1(e#) dQ l1(1/Q); all three factors
        // must certify finite, otherwise the entry stays exact.
        double inv_q = l1_bound(RatFun(Poly(std::vector<Rat>{1}), e.den()), cfg).l1_upper;
        double l1_new = dq.is_zero() ? 0.0 : l1_bound(snapped, cfg).l1_upper;
        double err = fp::add_up(fp::mul_up(dp.upper(), inv_q),
                                fp::mul_up(fp::mul_up(l1_new, dq.upper()), inv_q));
        if (!std::isfinite(err)) {
          if (warning) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%s[%zu][%zu] left exact (cannot re-certify); ", name,
                          r, c);
            *warning += buf;
          }
          continue;
        }
        m.at(r, c) = snapped;
        eps.set(r, c, fp::add_up(eps.at(r, c), err));
      }
  };
  process(h.T, h.eps_rel_T, "T");
  process(h.D, h.eps_rel_D, "D");
  return h;
}

NonnegMatrix l1_matrix(const RatFunMatrix& m, const BoundConfig& cfg) {
  NonnegMatrix out(m.rows(), m.cols());
  for (size_t r = 0; r < m.rows(); ++r)
    for (size_t c = 0; c < m.cols(); ++c) out.set(r, c, l1_bound(m.at(r, c), cfg).l1_upper);
  return out;
}

NonnegMatrix linf_matrix(const RatFunMatrix& m, const BoundConfig& cfg) {
  NonnegMatrix out(m.rows(), m.cols());
  for (size_t r = 0; r < m.rows(); ++r)
    for (size_t c = 0; c < m.cols(); ++c) out.set(r, c, linf_bound(m.at(r, c), cfg).linf_upper);
  return out;
}

std::vector<OutputBound> output_bound(const AbstractFilter& f,
                                      const std::vector<double>& in_bounds,
                                      const std::map<std::string, double>& reset_bounds,
                                      const BoundConfig& cfg) {
  f.validate();
  if (in_bounds.size() != f.n_in())
    throw std::invalid_argument("output_bound: one bound per input required");
  for (double b : in_bounds)
    if (std::isnan(b) || b < 0.0) throw std::invalid_argument("output_bound: bad input bound");

  // Group reset slots by label, in first-appearance order.
  std::vector<std::pair<std::string, std::vector<size_t>>> groups;
  std::vector<double> slot_mag(f.n_reset(), 0.0);
  for (size_t s = 0; s < f.n_reset(); ++s) {
    const ResetSlot& slot = f.resets[s];
    double m = 1.0;
    if (!slot.constant_one) {
      auto it = reset_bounds.find(slot.label);
      if (it == reset_bounds.end())
        throw std::invalid_argument("output_bound: no bound declared for reset '" + slot.label +
                                    "'");
      if (std::isnan(it->second) || it->second < 0.0)
        throw std::invalid_argument("output_bound: bad reset bound for '" + slot.label + "'");
      m = it->second;
    }
    slot_mag[s] = m;
    auto g = std::find_if(groups.begin(), groups.end(),
                          [&](const auto& p) { return p.first == slot.label; });
    if (g == groups.end()) groups.push_back({slot.label, {s}});
    else g->second.push_back(s);
  }

  std::vector<OutputBound> out(f.n_out());
  for (size_t i = 0; i < f.n_out(); ++i) {
    OutputBound& ob = out[i];
    for (size_t j = 0; j < f.n_in(); ++j) {
      KernelBound kb = l1_bound(f.T.at(i, j), cfg);
      double term = fp::mul_up(kb.l1_upper, in_bounds[j]);
      if (!std::isfinite(term) && ob.unbounded_entry.empty())
        ob.unbounded_entry = "T[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      ob.gain = fp::add_up(ob.gain, term);
      ob.t_kernels.push_back(std::move(kb));
    }
    for (size_t s = 0; s < f.n_reset(); ++s)
      ob.d_kernels.push_back(linf_bound(f.D.at(i, s), cfg));
    for (const auto& [label, slots] : groups) {
      GroupBound gb;
      gb.label = label;
      gb.magnitude = slot_mag[slots.front()];
      RatFun sum;
      double coarse = 0.0;
      for (size_t s : slots) {
        sum = sum + f.D.at(i, s);
        coarse = fp::add_up(coarse, fp::mul_up(ob.d_kernels[s].linf_upper, slot_mag[s]));
      }
      gb.fine = fp::mul_up(linf_bound(sum, cfg).linf_upper, gb.magnitude);
      // The grouped bound is never worse than the per-column one.
      if (coarse < gb.fine) gb.fine = coarse;
      gb.coarse = coarse;
      if (!std::isfinite(gb.fine) && gb.magnitude > 0.0 && ob.unbounded_entry.empty())
        ob.unbounded_entry = "D[" + std::to_string(i) + "][" + label + "]";
      ob.reset_fine = fp::add_up(ob.reset_fine, gb.fine);
      ob.reset_coarse = fp::add_up(ob.reset_coarse, gb.coarse);
      ob.groups.push_back(std::move(gb));
    }
    for (size_t j = 0; j < f.n_in(); ++j)
      ob.eps = fp::add_up(ob.eps, fp::mul_up(f.eps_rel_T.at(i, j), in_bounds[j]));
    for (size_t s = 0; s < f.n_reset(); ++s)
      ob.eps = fp::add_up(ob.eps, fp::mul_up(f.eps_rel_D.at(i, s), slot_mag[s]));
    ob.eps = fp::add_up(ob.eps, f.eps_abs[i]);
    if (!std::isfinite(ob.eps) && ob.unbounded_entry.empty())
      ob.unbounded_entry = "eps[" + std::to_string(i) + "]";
    ob.total = fp::add_up(fp::add_up(ob.gain, ob.reset_fine), ob.eps);
    ob.total_coarse = fp::add_up(fp::add_up(ob.gain, ob.reset_coarse), ob.eps);
    ob.bounded = std::isfinite(ob.total);
  }
  return out;
}

}  // namespace filtan
