#include "filtan/simulate.hpp"

#include <stdexcept>

namespace filtan {

namespace {

// Arithmetic policies: how coefficients, sums and delay loads are realized.
struct Binary64Ops {
  using Num = double;
  static double constant(const Rat& c) { return c.to_double(); }
  static double apply_coef(const Rat& c, double x) {
    if (c == Rat(1)) return x;
    if (c == Rat(-1)) return -x;
    return c.to_double() * x;
  }
  static double add(double a, double b) { return a + b; }
};

struct ExactOps {
  using Num = Rat;
  static Rat constant(const Rat& c) { return c; }
  static Rat apply_coef(const Rat& c, const Rat& x) { return c * x; }
  static Rat add(const Rat& a, const Rat& b) { return a + b; }
};

// One delay term's buffer: `cells[head]` is the oldest entry (the value the
// reader sees); pushes overwrite it and advance.
template <typename Num>
struct DelayBuf {
  bool from_input = false;
  size_t source = 0;  // node or input index
  std::vector<Num> cells;
  size_t head = 0;
};

template <typename Ops>
std::vector<std::vector<typename Ops::Num>> run(const FilterNetwork& net_in,
                                                const std::vector<std::vector<typename Ops::Num>>& inputs,
                                                const std::map<std::string, typename Ops::Num>& resets,
                                                size_t steps) {
  using Num = typename Ops::Num;
  const FilterNetwork net = net_in.has_blocks ? expand_blocks(net_in) : net_in;

  if (inputs.size() != net.inputs.size())
    throw std::invalid_argument("simulate: wrong number of input streams");
  for (const auto& s : inputs)
    if (s.size() < steps) throw std::invalid_argument("simulate: input stream shorter than steps");
  for (const auto& d : net.resets)
    if (!resets.count(d.name))
      throw std::invalid_argument("simulate: missing reset value for '" + d.name + "'");

  const size_t n = net.equations.size();

  // One buffer per delayed term, its cells loaded with fl(scale * reset).
  std::vector<DelayBuf<Num>> bufs;
  std::vector<std::vector<int>> term_buf(n);
  for (size_t v = 0; v < n; ++v) {
    term_buf[v].assign(net.equations[v].terms.size(), -1);
    for (size_t i = 0; i < net.equations[v].terms.size(); ++i) {
      const Term& t = net.equations[v].terms[i];
      if (t.kind != Term::Kind::delayed) continue;
      DelayBuf<Num> b;
      if (auto it = net.input_index.find(t.name); it != net.input_index.end()) {
        b.from_input = true;
        b.source = it->second;
      } else {
        b.source = net.node_index.at(t.name);
      }
      Num load = t.init.empty() ? Num(0) : Ops::apply_coef(t.init_scale, resets.at(t.init));
      b.cells.assign(t.ticks, load);
      term_buf[v][i] = static_cast<int>(bufs.size());
      bufs.push_back(std::move(b));
    }
  }

  std::vector<Num> vals(n, Num(0));
  std::vector<std::vector<Num>> out(net.outputs.size());
  for (auto& o : out) o.reserve(steps);

  for (size_t step = 0; step < steps; ++step) {
    for (size_t v : net.eval_order) {
      const Equation& eq = net.equations[v];
      Num acc(0);
      for (size_t i = 0; i < eq.terms.size(); ++i) {
        const Term& t = eq.terms[i];
        Num x(0);
        switch (t.kind) {
          case Term::Kind::constant:
            x = Ops::constant(t.coef);
            break;
          case Term::Kind::node: {
            Num raw = net.input_index.count(t.name) ? inputs[net.input_index.at(t.name)][step]
                                                    : vals[net.node_index.at(t.name)];
            x = Ops::apply_coef(t.coef, raw);
            break;
          }
          case Term::Kind::delayed: {
            const DelayBuf<Num>& b = bufs[term_buf[v][i]];
            x = Ops::apply_coef(t.coef, b.cells[b.head]);
            break;
          }
        }
        acc = i == 0 ? x : Ops::add(acc, x);
      }
      vals[v] = acc;
    }
    for (auto& b : bufs) {
      b.cells[b.head] = b.from_input ? inputs[b.source][step] : vals[b.source];
      b.head = (b.head + 1) % b.cells.size();
    }
    for (size_t o = 0; o < net.outputs.size(); ++o) {
      const std::string& name = net.outputs[o].name;
      out[o].push_back(net.input_index.count(name) ? inputs[net.input_index.at(name)][step]
                                                   : vals[net.node_index.at(name)]);
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> simulate_binary64(const FilterNetwork& net,
                                                   const std::vector<std::vector<double>>& inputs,
                                                   const std::map<std::string, double>& resets,
                                                   size_t steps) {
  return run<Binary64Ops>(net, inputs, resets, steps);
}

std::vector<std::vector<Rat>> simulate_exact(const FilterNetwork& net,
                                             const std::vector<std::vector<Rat>>& inputs,
                                             const std::map<std::string, Rat>& resets,
                                             size_t steps) {
  return run<ExactOps>(net, inputs, resets, steps);
}

}  // namespace filtan
