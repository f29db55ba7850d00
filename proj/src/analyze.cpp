#include "filtan/analyze.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "filtan/interval.hpp"
#include "filtan/kernel_bound.hpp"
#include "filtan/ratfun_matrix.hpp"

namespace filtan {

namespace {

// Runs fn(0..count-1) on up to `jobs` threads.  Work items write to disjoint
// slots, so the result is independent of scheduling.
void parallel_entries(std::size_t count, unsigned jobs,
                      const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned extra = jobs - 1;
  pool.reserve(extra);
  for (unsigned t = 0; t < extra; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---- realized-arithmetic cost of one coefficient ----
//
// For the stored image c~ of c and a realized operand x~:
//   |fl(c~ * x~) - c * x~| <= rel * |x~| + abs,   |c~| <= chat.
// Unit coefficients and exact formats perform no operation at all.
struct MulErr {
  double rel = 0.0;
  double abs = 0.0;
  double chat = 0.0;
  bool op = false;  // a rounded multiplication actually happens
};

MulErr coef_mul_error(const Rat& c, const FloatFormat& fmt) {
  MulErr e;
  e.chat = abs(c).upper();
  if (fmt.kind == FloatFormat::Kind::exact || c == Rat(1) || c == Rat(-1) ||
      c.is_zero())
    return e;
  e.op = true;
  double dc = representation_error(c, fmt);
  if (dc == 0.0) {
    auto [rel, a] = scale_error(c, fmt);
    e.rel = rel;
    e.abs = a;
    return e;
  }
  // c~ = c + dc at most; then one rounded multiplication by c~.
  e.chat = fp::add_up(e.chat, dc);
  e.rel = fp::add_up(dc, fp::mul_up(fmt.eps_rel, e.chat));
  e.abs = fmt.eps_abs;
  return e;
}

// Affine bound a.mu . [in bounds | reset bounds | 1] + a.drift . Delta over
// the magnitude of one realized quantity; all accumulation rounds upward.
struct Aff {
  std::vector<double> mu;     // m inputs, then p reset slots, then 1 absolute
  std::vector<double> drift;  // one coefficient per node
};

void add_into(Aff& a, const Aff& b) {
  for (std::size_t i = 0; i < a.mu.size(); ++i)
    a.mu[i] = fp::add_up(a.mu[i], b.mu[i]);
  for (std::size_t i = 0; i < a.drift.size(); ++i)
    a.drift[i] = fp::add_up(a.drift[i], b.drift[i]);
}

Aff scaled_aff(const Aff& a, double k) {
  Aff r = a;
  for (double& x : r.mu) x = fp::mul_up(k, x);
  for (double& x : r.drift) x = fp::mul_up(k, x);
  return r;
}

Aff added_aff(const Aff& a, const Aff& b) {
  Aff r = a;
  add_into(r, b);
  return r;
}

struct SlotRef {
  std::size_t eq = 0;
  std::size_t term = 0;
};

// ---- equation-form analysis ----

struct EquationAnalyzer {
  const FilterNetwork& net;
  const FloatFormat& fmt;
  const BoundConfig& cfg;
  unsigned jobs;
  Analysis& out;

  std::size_t n = 0;  // nodes
  std::size_t m = 0;  // inputs
  std::vector<SlotRef> slots;
  bool use_const = false;
  std::size_t p = 0;      // reset columns (incl. const pseudo-slot)
  std::size_t cix = 0;    // const column (= slots.size() when used)
  std::size_t q = 0;      // error-basis size: m + p + 1

  RatFunMatrix t_node{0, 0};     // node transfer rows vs inputs
  RatFunMatrix d_node{0, 0};     // node responses vs reset columns
  RatFunMatrix minv{0, 0};       // (Id - G)^-1
  NonnegMatrix a_norm{0, 0};     // entrywise l1 uppers of minv
  NonnegMatrix l1_node{0, 0};    // l1 uppers of t_node
  NonnegMatrix linf_node{0, 0};  // linf uppers of d_node

  void run() {
    n = net.equations.size();
    m = net.inputs.size();
    collect_slots();
    solve_exact_system();
    kernel_norms();

    std::vector<std::vector<double>> cols;  // q certified drift columns
    bool inexact = fmt.kind != FloatFormat::Kind::exact;
    if (inexact) cols = drift_columns();
    assemble_filter(cols, inexact);
  }

  void collect_slots() {
    for (std::size_t v = 0; v < n; ++v) {
      const Equation& eq = net.equations[v];
      for (std::size_t t = 0; t < eq.terms.size(); ++t) {
        const Term& term = eq.terms[t];
        if (term.kind == Term::Kind::delayed && !term.init.empty())
          slots.push_back({v, t});
        if (term.kind == Term::Kind::constant) use_const = true;
      }
    }
    cix = slots.size();
    p = slots.size() + (use_const ? 1 : 0);
    q = m + p + 1;

    // Human-readable slot tags: "<label>@<node>", disambiguated on collision.
    std::vector<std::string> desc;
    desc.reserve(p);
    for (const SlotRef& s : slots) {
      std::string base = net.equations[s.eq].terms[s.term].init + "@" +
                         net.equations[s.eq].lhs;
      std::string tag = base;
      int k = 2;
      while (std::find(desc.begin(), desc.end(), tag) != desc.end())
        tag = base + "#" + std::to_string(k++);
      desc.push_back(tag);
    }
    if (use_const) desc.push_back("1");
    out.slot_desc = desc;
  }

  void solve_exact_system() {
    RatFunMatrix mat(n, n);
    RatFunMatrix rhs(n, m + p + n);
    for (std::size_t v = 0; v < n; ++v) mat.at(v, v) = RatFun(Rat(1));
    std::size_t slot = 0;
    for (std::size_t v = 0; v < n; ++v) {
      const Equation& eq = net.equations[v];
      for (std::size_t t = 0; t < eq.terms.size(); ++t) {
        const Term& term = eq.terms[t];
        switch (term.kind) {
          case Term::Kind::node: {
            RatFun c(term.coef);
            auto in = net.input_index.find(term.name);
            if (in != net.input_index.end())
              rhs.at(v, in->second) = rhs.at(v, in->second) + c;
            else
              mat.at(v, net.node_index.at(term.name)) =
                  mat.at(v, net.node_index.at(term.name)) - c;
            break;
          }
          case Term::Kind::delayed: {
            RatFun zk(Poly::z(term.ticks));
            zk = zk.scaled(term.coef);
            auto in = net.input_index.find(term.name);
            if (in != net.input_index.end())
              rhs.at(v, in->second) = rhs.at(v, in->second) + zk;
            else
              mat.at(v, net.node_index.at(term.name)) =
                  mat.at(v, net.node_index.at(term.name)) - zk;
            if (!term.init.empty()) {
              // The delay's first `ticks` outputs are scale * reset.
              std::vector<Rat> ones(term.ticks, Rat(1));
              Poly window(ones);
              RatFun f(window.scaled(term.coef * term.init_scale));
              rhs.at(v, m + slot) = rhs.at(v, m + slot) + f;
              ++slot;
            }
            break;
          }
          case Term::Kind::constant: {
            // Per-step constant: c/(1-z) against the pinned-to-1 column.
            RatFun f(Poly(term.coef), Poly(std::vector<Rat>{Rat(1), Rat(-1)}));
            rhs.at(v, m + cix) = rhs.at(v, m + cix) + f;
            out.const_feeds.emplace_back(eq.lhs, term.coef);
            break;
          }
        }
      }
      rhs.at(v, m + p + v) = RatFun(Rat(1));
    }
    RatFunMatrix x = solve_linear_system(mat, rhs);
    t_node = x.columns(0, m);
    d_node = x.columns(m, p);
    minv = x.columns(m + p, n);
  }

  void kernel_norms() {
    a_norm = NonnegMatrix(n, n);
    l1_node = NonnegMatrix(n, m);
    linf_node = NonnegMatrix(n, p);
    // Flat index space over all three matrices; entries are independent.
    std::size_t total = n * (n + m + p);
    parallel_entries(total, jobs, [&](std::size_t i) {
      std::size_t v = i / (n + m + p);
      std::size_t c = i % (n + m + p);
      if (c < n)
        a_norm.set(v, c, l1_bound(minv.at(v, c), cfg).l1_upper);
      else if (c < n + m)
        l1_node.set(v, c - n, l1_bound(t_node.at(v, c - n), cfg).l1_upper);
      else
        linf_node.set(v, c - n - m,
                      linf_bound(d_node.at(v, c - n - m), cfg).linf_upper);
    });
  }

  // ---- rounding model ----

  Aff zero_aff() const { return Aff{std::vector<double>(q, 0.0), std::vector<double>(n, 0.0)}; }

  Aff read_node(std::size_t w) const {
    Aff r = zero_aff();
    for (std::size_t j = 0; j < m; ++j) r.mu[j] = l1_node.at(w, j);
    for (std::size_t s = 0; s < p; ++s) r.mu[m + s] = linf_node.at(w, s);
    r.drift[w] = 1.0;
    return r;
  }

  Aff read_input(std::size_t j) const {
    Aff r = zero_aff();
    r.mu[j] = 1.0;
    return r;
  }

  // Certified drift columns: for each basis element b (input, reset slot, or
  // the absolute unit), a vector B_b with K1 * B_b + y_b <= B_b where y_b is
  // the routed per-node residual attributable to b.  Nonnegative combinations
  // of certified columns stay certified, so consumers may sum them upward.
  std::vector<std::vector<double>> drift_columns() {
    bool is_float = fmt.kind == FloatFormat::Kind::ieee32 ||
                    fmt.kind == FloatFormat::Kind::ieee64;
    double u = fmt.eps_rel;
    double onepu = fp::add_up(1.0, u);

    // Per-node residual, affine over the basis and the drift symbols.
    std::vector<Aff> resid(n, zero_aff());
    std::size_t slot = 0;
    for (std::size_t v = 0; v < n; ++v) {
      const Equation& eq = net.equations[v];
      Aff sum_v = zero_aff();   // bound on the realized partial sum
      Aff sum_e = zero_aff();   // residual vs the exact combination
      bool first = true;
      for (std::size_t t = 0; t < eq.terms.size(); ++t) {
        const Term& term = eq.terms[t];
        Aff rb = zero_aff();    // bound on the realized operand magnitude
        Aff terr = zero_aff();  // residual of this term alone
        Aff tv = zero_aff();    // bound on the realized term magnitude

        if (term.kind == Term::Kind::constant) {
          double dc = representation_error(term.coef, fmt);
          rb.mu[q - 1] = fp::add_up(abs(term.coef).upper(), dc);
          terr.mu[q - 1] = dc;
          tv = rb;
        } else {
          auto in = net.input_index.find(term.name);
          rb = (in != net.input_index.end())
                   ? read_input(in->second)
                   : read_node(net.node_index.at(term.name));
          if (term.kind == Term::Kind::delayed && !term.init.empty()) {
            // Warm-up samples come from the loaded cell fl(scale * reset).
            MulErr ms = coef_mul_error(term.init_scale, fmt);
            double lvf = ms.op ? fp::mul_up(onepu, ms.chat) : ms.chat;
            rb.mu[m + slot] = fp::add_up(rb.mu[m + slot], lvf);
            if (ms.op) rb.mu[q - 1] = fp::add_up(rb.mu[q - 1], fmt.eps_abs);
            Aff lerr = zero_aff();
            lerr.mu[m + slot] = ms.rel;
            lerr.mu[q - 1] = ms.abs;
            add_into(terr, scaled_aff(lerr, abs(term.coef).upper()));
            ++slot;
          }
          MulErr me = coef_mul_error(term.coef, fmt);
          add_into(terr, scaled_aff(rb, me.rel));
          terr.mu[q - 1] = fp::add_up(terr.mu[q - 1], me.abs);
          bool pass = term.coef == Rat(1) || term.coef == Rat(-1);
          if (pass) {
            tv = rb;
          } else {
            double tvf = me.op ? fp::mul_up(onepu, me.chat) : me.chat;
            tv = scaled_aff(rb, tvf);
            if (me.op) tv.mu[q - 1] = fp::add_up(tv.mu[q - 1], fmt.eps_abs);
          }
        }

        if (first) {
          sum_v = tv;
          sum_e = terr;
          first = false;
        } else {
          add_into(sum_e, terr);
          Aff tot = added_aff(sum_v, tv);
          if (is_float) add_into(sum_e, scaled_aff(tot, u));
          sum_v = is_float ? scaled_aff(tot, onepu) : tot;
        }
      }
      resid[v] = sum_e;
    }

    // Split the residuals: y = A * mu-part (per basis column), K1 = A * sigma.
    NonnegMatrix sigma(n, n);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t w = 0; w < n; ++w) sigma.set(v, w, resid[v].drift[w]);
    out.k1 = mul_up(a_norm, sigma);
    out.has_fixpoint = true;
    out.k1_norm = subordinate_inf_norm(out.k1);

    std::vector<std::vector<double>> cols(q);
    if (!out.k1.all_finite() || !(out.k1_norm < 1.0)) {
      out.drift_contracting = false;
      if (!out.warnings.empty()) out.warnings += "\n";
      out.warnings += "rounding-error feedback not contracting; error bounds degraded to +inf";
      for (auto& c : cols) c.assign(n, fp::kInf);
      return cols;
    }
    for (std::size_t b = 0; b < q; ++b) {
      std::vector<double> mu_col(n);
      for (std::size_t v = 0; v < n; ++v) mu_col[v] = resid[v].mu[b];
      std::vector<double> y = mul_up(a_norm, mu_col);
      cols[b] = fixpoint_upper_bound(out.k1, y);
      out.fix_y.push_back(y);
      out.fix_B.push_back(cols[b]);
    }
    return cols;
  }

  void assemble_filter(const std::vector<std::vector<double>>& cols, bool inexact) {
    std::size_t n_out = net.outputs.size();
    AbstractFilter f;
    f.T = RatFunMatrix(n_out, m);
    f.D = RatFunMatrix(n_out, p);
    f.eps_rel_T = NonnegMatrix(n_out, m);
    f.eps_rel_D = NonnegMatrix(n_out, p);
    f.eps_abs.assign(n_out, 0.0);
    for (std::size_t s = 0; s < slots.size(); ++s)
      f.resets.push_back(ResetSlot{net.equations[slots[s].eq].terms[slots[s].term].init, false});
    if (use_const) f.resets.push_back(ResetSlot{"1", true});

    for (std::size_t i = 0; i < n_out; ++i) {
      const std::string& name = net.outputs[i].name;
      auto in = net.input_index.find(name);
      if (in != net.input_index.end()) {
        f.T.at(i, in->second) = RatFun(Rat(1));  // outputs may tap an input
        continue;
      }
      std::size_t w = net.node_index.at(name);
      for (std::size_t j = 0; j < m; ++j) f.T.at(i, j) = t_node.at(w, j);
      for (std::size_t s = 0; s < p; ++s) f.D.at(i, s) = d_node.at(w, s);
      if (inexact) {
        for (std::size_t j = 0; j < m; ++j) f.eps_rel_T.set(i, j, cols[j][w]);
        for (std::size_t s = 0; s < p; ++s) f.eps_rel_D.set(i, s, cols[m + s][w]);
        f.eps_abs[i] = cols[q - 1][w];
      }
    }
    f.validate();
    out.filter = std::move(f);
  }
};

std::size_t filter_bit_size(const AbstractFilter& f) {
  std::size_t bits = 0;
  for (std::size_t r = 0; r < f.T.rows(); ++r)
    for (std::size_t c = 0; c < f.T.cols(); ++c)
      bits = std::max(bits, f.T.at(r, c).max_coeff_bit_size());
  for (std::size_t r = 0; r < f.D.rows(); ++r)
    for (std::size_t c = 0; c < f.D.cols(); ++c)
      bits = std::max(bits, f.D.at(r, c).max_coeff_bit_size());
  return bits;
}

AbstractFilter build_block(const Block& b, const FloatFormat& fmt,
                           const BoundConfig& cfg, unsigned budget,
                           std::string& warnings) {
  auto maybe_quantize = [&](AbstractFilter f) {
    if (budget > 0 && filter_bit_size(f) > budget) {
      std::string note;
      f = quantize(f, budget, cfg, &note);
      if (!note.empty()) {
        if (!warnings.empty()) warnings += "\n";
        warnings += note;
      }
    }
    return f;
  };
  switch (b.kind) {
    case Block::Kind::plus:
      return make_plus(fmt);
    case Block::Kind::scale:
      return make_scale(b.value, fmt);
    case Block::Kind::delay:
      return b.init.empty() ? make_delay(b.n)
                            : make_delay_init(b.n, b.init, b.init_scale, fmt);
    case Block::Kind::constant:
      return make_constant_source(b.value, fmt);
    case Block::Kind::wire:
      return make_wire(b.n);
    case Block::Kind::fanout:
      return make_fanout(b.n);
    case Block::Kind::route: {
      // route(n : k1, ..., km): out_j = sign(kj) * in_|kj| (1-based), 0 emits 0.
      std::vector<std::vector<int>> entries(
          b.route_map.size(), std::vector<int>(static_cast<std::size_t>(b.n), 0));
      for (std::size_t i = 0; i < b.route_map.size(); ++i) {
        int k = b.route_map[i];
        if (k > 0)
          entries[i][static_cast<std::size_t>(k - 1)] = 1;
        else if (k < 0)
          entries[i][static_cast<std::size_t>(-k - 1)] = -1;
      }
      return make_route(b.route_map.size(), static_cast<std::size_t>(b.n), entries);
    }
    case Block::Kind::serial: {
      AbstractFilter acc =
          build_block(b.children.front(), fmt, cfg, budget, warnings);
      for (std::size_t i = 1; i < b.children.size(); ++i) {
        AbstractFilter g = build_block(b.children[i], fmt, cfg, budget, warnings);
        acc = maybe_quantize(compose_serial(g, acc, cfg));
      }
      return acc;
    }
    case Block::Kind::parallel: {
      AbstractFilter acc =
          build_block(b.children.front(), fmt, cfg, budget, warnings);
      for (std::size_t i = 1; i < b.children.size(); ++i) {
        AbstractFilter g = build_block(b.children[i], fmt, cfg, budget, warnings);
        acc = compose_parallel(acc, g);
      }
      return acc;
    }
    case Block::Kind::feedback: {
      AbstractFilter inner =
          build_block(b.children.front(), fmt, cfg, budget, warnings);
      return maybe_quantize(compose_feedback(inner, b.n, cfg));
    }
  }
  throw std::logic_error("unhandled block kind");
}

}  // namespace

Analysis analyze_network(const FilterNetwork& net, const FloatFormat& fmt,
                         const BoundConfig& cfg, unsigned quantize_budget,
                         unsigned jobs) {
  auto start = std::chrono::steady_clock::now();
  Analysis out;
  out.fmt = fmt;
  out.cfg = cfg;
  out.quantize_budget = quantize_budget;
  for (const InputDecl& d : net.inputs) {
    out.input_names.push_back(d.name);
    out.in_bounds.push_back(d.has_bound ? d.bound.upper() : fp::kInf);
  }
  for (const OutputDecl& d : net.outputs) out.output_names.push_back(d.name);
  for (const ResetDecl& d : net.resets)
    out.reset_bounds[d.name] = d.has_bound ? d.bound.upper() : fp::kInf;

  if (net.has_blocks) {
    out.filter = build_block(net.blocks, fmt, cfg, quantize_budget,
                             out.warnings);
    for (const ResetSlot& s : out.filter.resets)
      out.slot_desc.push_back(s.constant_one ? "1" : s.label);
  } else {
    EquationAnalyzer an{.net = net, .fmt = fmt, .cfg = cfg, .jobs = jobs, .out = out};
    an.run();
    if (quantize_budget > 0 && filter_bit_size(out.filter) > quantize_budget) {
      std::string note;
      out.filter = quantize(out.filter, quantize_budget, cfg, &note);
      if (!note.empty()) {
        if (!out.warnings.empty()) out.warnings += "\n";
        out.warnings += note;
      }
    }
  }

  // Every declared reset label must resolve; undeclared labels inside the
  // network were already rejected at parse time.
  out.bounds.clear();
  out.bounds.reserve(out.output_names.size());
  std::vector<OutputBound> all =
      output_bound(out.filter, out.in_bounds, out.reset_bounds, cfg);
  out.bounds = std::move(all);

  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

}  // namespace filtan
