#pragma once

/**
 * Surface syntax for filter networks.
 *
 * Two equivalent forms share one file format:
 *
 *   equations — one linear assignment per node, delays written inline:
 *       input e <= 400;
 *       reset iota <= 400;
 *       s0d = delay(s0, 1, iota);
 *       p   = 0.5*e + 1.5*s0d;
 *       s0  = p;
 *       output p;
 *
 *   blocks — a single combinator expression wired positionally:
 *       input u <= 1;
 *       blocks serial(feedback(serial(parallel(wire(1), scale(9/10)),
 *                                      plus, fanout(2)), 1),
 *                     route(2 : 1));
 *       output y;
 *
 * Statements are line-oriented and ';'-terminated; '#' and '//' start
 * comments.  Rational literals accept p/q and exact decimal forms.  A node
 * is assigned exactly once, every referenced name must be declared or
 * assigned, and the delay-free dependency relation must be acyclic (cycles
 * are rejected as non-causal).  delay(x, n, s*r) reads x delayed by n steps
 * with all n cells loaded with s times the declared reset value r.
 */

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "filtan/rat.hpp"

namespace filtan {

struct SourceLoc {
  size_t line = 0, col = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& msg)
      : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + msg),
        loc_(loc) {}
  SourceLoc where() const { return loc_; }

 private:
  SourceLoc loc_;
};

// One summand of a linear expression, sign folded into the coefficient.
struct Term {
  enum class Kind { node, delayed, constant };
  Kind kind = Kind::node;
  Rat coef = Rat(1);    // node/delayed: multiplier; constant: the emitted value
  std::string name;     // referenced node or input
  size_t ticks = 0;     // delayed: delay length, >= 1
  std::string init;     // delayed: reset label, "" for zero-initialized cells
  Rat init_scale = Rat(1);
  SourceLoc loc;
};

struct Equation {
  std::string lhs;
  std::vector<Term> terms;
  SourceLoc loc;
};

struct InputDecl {
  std::string name;
  bool has_bound = false;
  Rat bound;
  SourceLoc loc;
};

struct ResetDecl {
  std::string name;
  bool has_bound = false;
  Rat bound;
  SourceLoc loc;
};

struct OutputDecl {
  std::string name;
  SourceLoc loc;
};

// Combinator expression of the blocks form.
struct Block {
  enum class Kind {
    plus,      // 2 -> 1 rounded addition
    scale,     // 1 -> 1 multiplication by `value`
    delay,     // 1 -> 1, `n` steps, optional init `init_scale * init`
    constant,  // 0 -> 1 source emitting `value`
    wire,      // n -> n identity
    fanout,    // 1 -> n duplication
    route,     // route(n : k1, ..., km): out_j = sign(kj) * in_|kj|, 0 emits 0
    serial,    // children applied left to right
    parallel,  // children stacked
    feedback   // last n outputs looped to last n inputs through unit delays
  };
  Kind kind = Kind::plus;
  Rat value;
  size_t n = 0;
  std::string init;
  Rat init_scale = Rat(1);
  std::vector<int> route_map;
  std::vector<Block> children;
  SourceLoc loc;
};

struct BlockArity {
  size_t n_in = 0, n_out = 0;
};

// Shape of a combinator expression; throws ParseError on an internal
// arity mismatch (e.g. serial children that do not chain).
BlockArity block_arity(const Block& b);

struct FilterNetwork {
  std::vector<InputDecl> inputs;
  std::vector<ResetDecl> resets;
  std::vector<Equation> equations;
  std::vector<OutputDecl> outputs;
  bool has_blocks = false;
  Block blocks;
  bool has_format = false;
  std::string format;  // optional in-file format selection, e.g. "ieee64"

  // Filled by validation: equation indices in an executable order (every
  // delay-free reference points to an earlier entry), and name lookups.
  std::vector<size_t> eval_order;
  std::map<std::string, size_t> node_index;   // lhs -> equation index
  std::map<std::string, size_t> input_index;  // input -> position
  std::map<std::string, size_t> reset_index;  // reset label -> position
};

// Parses and validates; throws ParseError with line/column on any syntax,
// multiple-assignment, undeclared-name, arity, or non-causality defect.
FilterNetwork parse_network(const std::string& source);

// Canonical form: parse_network(print_network(n)) reproduces n, and
// print is a fixpoint on its own output.
std::string print_network(const FilterNetwork& net);

// Rewrites a blocks-form network into the equivalent equation form (returns
// equation-form networks unchanged).  Synthesized node names are fresh; the
// declared inputs, resets and outputs keep theirs.  Wiring, fanout and
// routing become name aliasing or single-term equations, so the expansion
// adds no arithmetic beyond what the blocks perform.
FilterNetwork expand_blocks(const FilterNetwork& net);

}  // namespace filtan
