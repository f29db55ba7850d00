#pragma once

/**
 * The analyzer's abstract value: an exact transfer description of a filter
 * plus a certified bound on how far any rounded realization can drift.
 *
 * A filter maps input streams I (n_in of them) and reset values R (n_reset,
 * loaded when the filter is reset) to output streams.  The abstraction is
 *   - T: n_out x n_in exact transfer matrix (z = unit delay),
 *   - D: n_out x n_reset exact reset responses,
 *   - the error contract, entrywise over output coordinates:
 *       |out - out~|_inf  <=  eps_rel_T |I|_inf + eps_rel_D |R|_inf + eps_abs
 * where out~ is the filter realized in a FloatFormat and |.|_inf are
 * per-coordinate sup norms.  Composition operators preserve the contract.
 */

#include <map>
#include <string>
#include <vector>

#include "filtan/float_format.hpp"
#include "filtan/kernel_bound.hpp"
#include "filtan/nonneg.hpp"
#include "filtan/ratfun_matrix.hpp"

namespace filtan {

struct ResetSlot {
  std::string label;          // slots with equal labels carry the same value
  bool constant_one = false;  // constant-source pseudo reset, magnitude fixed to 1
};

struct AbstractFilter {
  RatFunMatrix T{0, 0};
  RatFunMatrix D{0, 0};
  NonnegMatrix eps_rel_T{0, 0};
  NonnegMatrix eps_rel_D{0, 0};
  std::vector<double> eps_abs;
  std::vector<ResetSlot> resets;

  size_t n_in() const { return T.cols(); }
  size_t n_out() const { return T.rows(); }
  size_t n_reset() const { return D.cols(); }
  void validate() const;  // throws std::logic_error on shape mismatch
};

// ---- format error primitives ----

// Error of one rounded multiplication by k held exactly in the format:
// |fl(k*x) - k*x| <= rel*|x| + abs.
std::pair<double, double> scale_error(const Rat& k, const FloatFormat& fmt);
// Upper bound on the distance from c to the format's nearest representable
// value (coefficient / constant quantization).
double representation_error(const Rat& c, const FloatFormat& fmt);

// ---- basic blocks ----

// out = in1 + in2 (one rounded addition).
AbstractFilter make_plus(const FloatFormat& fmt);
// out = k * in (one rounded multiplication: |k|*eps_rel + eps_abs).
AbstractFilter make_scale(const Rat& k, const FloatFormat& fmt);
// out_t = in_{t-n}, zero-initialized: exact.
AbstractFilter make_delay(size_t n);
// n-step delay whose n cells are loaded with scale * <label> at reset.
AbstractFilter make_delay_init(size_t n, const std::string& label, const Rat& scale,
                               const FloatFormat& fmt);
// Emits c every step; modeled as the reset response c/(1-z) of a pseudo
// reset pinned to 1.
AbstractFilter make_constant_source(const Rat& c, const FloatFormat& fmt);
// Exact signal routing: entries in {-1, 0, 1}, at most one nonzero per row.
AbstractFilter make_route(size_t n_out, size_t n_in,
                          const std::vector<std::vector<int>>& entries);
AbstractFilter make_wire(size_t n = 1);       // identity routing
AbstractFilter make_fanout(size_t copies);    // 1 -> n duplication

// ---- combinators ----

// Stacks a and b: inputs, outputs and resets concatenate.
AbstractFilter compose_parallel(const AbstractFilter& a, const AbstractFilter& b);

// g after f (f feeds g); error terms account for g seeing f's rounded output.
AbstractFilter compose_serial(const AbstractFilter& g, const AbstractFilter& f,
                              const BoundConfig& cfg = {});

// Closes a loop: the last n_fb outputs are fed through exact zero-initialized
// unit delays into the last n_fb inputs.  The rounding-error feedback gain
// K1 = N1((Id - z T_O)^-1) * eps_O must be a sup-norm contraction: if K1 is
// finite with norm >= 1 the composition throws; if the exact loop itself is
// unstable the result carries +inf error markers (and exact T, D).
AbstractFilter compose_feedback(const AbstractFilter& f, size_t n_fb,
                                const BoundConfig& cfg = {});

// Rounds every transfer coefficient to the dyadic grid 2^-bits and moves a
// certified bound on the induced kernel change into the error matrices.
// Entries whose quantized denominator cannot be re-certified stable are left
// exact and noted in *warning.
AbstractFilter quantize(const AbstractFilter& f, unsigned bits, const BoundConfig& cfg = {},
                        std::string* warning = nullptr);

// ---- certified output bounds ----

struct GroupBound {
  std::string label;
  double magnitude = 0.0;  // bound on the shared reset value
  double fine = 0.0;       // |linf(sum of the group's columns)| * magnitude
  double coarse = 0.0;     // sum of per-column linf * magnitude
};

struct OutputBound {
  bool bounded = false;
  double gain = 0.0;          // sum_j l1(T_ij) * in_bound_j
  double reset_fine = 0.0;    // grouped columns summed exactly before linf
  double reset_coarse = 0.0;  // per-column triangle inequality
  double eps = 0.0;           // rounding contribution
  double total = 0.0;         // gain + reset_fine + eps
  double total_coarse = 0.0;  // gain + reset_coarse + eps
  std::string unbounded_entry;  // first kernel that failed, e.g. "T[0][1]"
  std::vector<KernelBound> t_kernels;  // per input column
  std::vector<KernelBound> d_kernels;  // per reset slot
  std::vector<GroupBound> groups;
};

// Certified worst-case output magnitudes for |in_j| <= in_bounds[j] and
// |reset with label L| <= reset_bounds.at(L).  Missing labels throw.
std::vector<OutputBound> output_bound(const AbstractFilter& f,
                                      const std::vector<double>& in_bounds,
                                      const std::map<std::string, double>& reset_bounds,
                                      const BoundConfig& cfg = {});

// Entrywise kernel-norm matrices (+inf for unstable entries).
NonnegMatrix l1_matrix(const RatFunMatrix& m, const BoundConfig& cfg = {});
NonnegMatrix linf_matrix(const RatFunMatrix& m, const BoundConfig& cfg = {});

}  // namespace filtan
