#pragma once

/**
 * Analysis driver: turns a parsed network into an abstract filter with
 * certified output bounds.
 *
 * Equation form — the node equations become one exact linear system
 * (Id - G) X = E I + F R over causal rational functions: delay-free
 * references land in G's constant part, delayed references contribute
 * z^n entries, init values contribute reset columns (scale * (1 + ... +
 * z^{n-1}) seen from the delay), and per-step constants contribute a
 * c/(1-z) column on a pseudo-reset pinned to 1.  One Gaussian elimination
 * against [E | F | Id] yields every node's transfer row, reset responses,
 * and the system inverse used by the rounding model.
 *
 * The rounding model replays each equation the way the realized program
 * evaluates it — coefficients stored in the analyzed format, one rounded
 * multiplication per non-unit coefficient, left-to-right summation, delay
 * cells loaded with fl(scale * reset) — and collects, per node, an affine
 * bound on the per-step residual in terms of input bounds, reset bounds and
 * the (unknown) drift of every node signal.  Routing residuals through the
 * system inverse closes the loop: drift <= K1 * drift + y with
 * K1 = N1((Id-G)^-1) * sigma, solved by the certified fixpoint per basis
 * column so the result splits into per-input, per-reset and absolute error
 * components.  A non-contracting K1 degrades to +inf error markers rather
 * than failing the analysis.
 *
 * Blocks form — built directly from the composition operators; the same
 * bit-size budget decides when transfer coefficients are quantized.
 */

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "filtan/abstract_filter.hpp"
#include "filtan/network.hpp"

namespace filtan {

struct Analysis {
  FloatFormat fmt;
  BoundConfig cfg;
  unsigned quantize_budget = 512;

  std::vector<std::string> input_names;
  std::vector<double> in_bounds;  // +inf when undeclared
  std::vector<std::string> output_names;
  std::vector<std::string> slot_desc;          // one per reset slot of `filter`
  std::map<std::string, double> reset_bounds;  // declared label -> bound

  AbstractFilter filter;            // rows = declared outputs
  std::vector<OutputBound> bounds;  // one per output

  // Drift-fixpoint certificate (equation path, inexact formats): every
  // emitted error column B satisfies K1*B + y <= B by construction.
  bool has_fixpoint = false;
  bool drift_contracting = true;
  double k1_norm = 0.0;
  NonnegMatrix k1;
  std::vector<std::vector<double>> fix_y, fix_B;

  std::vector<std::pair<std::string, Rat>> const_feeds;  // node -> per-step constant
  std::string warnings;
  double elapsed_seconds = 0.0;  // reported in text form only, never in JSON
};

// quantize_budget: transfer coefficients are snapped to the dyadic grid
// 2^-budget (with the induced kernel change certified into the error terms)
// only when some coefficient exceeds `budget` bits; 0 disables quantization.
// jobs parallelizes independent kernel-norm computations; results are
// byte-identical for every job count.
Analysis analyze_network(const FilterNetwork& net, const FloatFormat& fmt,
                         const BoundConfig& cfg = {}, unsigned quantize_budget = 512,
                         unsigned jobs = 1);

}  // namespace filtan
