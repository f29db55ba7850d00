#pragma once

/**
 * Certified convolution-kernel norms.
 *
 * The L1 norm of a causal kernel is the filter's worst-case amplification of
 * a bounded input stream, so every gain bound of the analyzer reduces to an
 * upper bound of ||P/Q||_1.  The kernel is split as P = D*Q + R*z^N where D
 * collects the first N series coefficients: the head is summed directly and
 * the infinite tail ||R/Q * z^N||_1 is bounded through the denominator's
 * certified root moduli (or exactly, for second-degree denominators with a
 * conjugate root pair).
 */

#include <string>
#include <vector>

#include "filtan/interval_poly.hpp"
#include "filtan/ratfun.hpp"
#include "filtan/roots.hpp"

namespace filtan {

enum class Stability { stable, unstable, unknown };
enum class TailMethod { polynomial_exact, second_order_complex, rough_product, none };

const char* to_string(Stability s);
const char* to_string(TailMethod m);

struct KernelBound {
  double l1_upper = 0.0;
  double linf_upper = 0.0;
  double head_l1 = 0.0;
  double tail_l1 = 0.0;
  size_t dev_len = 0;  // N: number of certified head coefficients
  TailMethod method = TailMethod::polynomial_exact;
  Stability stability = Stability::stable;
  bool strip_one_minus_z = false;  // linf obtained from l1(f * (1-z))
  std::vector<RootEnclosure> den_roots;
  std::string note;

  bool stable() const { return stability == Stability::stable; }
};

struct BoundConfig {
  size_t n_max = 4096;     // development cap
  size_t degree_cap = 64;  // max num/den degree at composition boundaries
  // Exact rational head/remainder instead of the interval split.  The
  // interval recurrence of a certified-stable kernel contracts, so its
  // accumulated width is negligible (~N*2^-52 relative); the exact path
  // costs O(N^2) rational arithmetic and buys nothing measurable.
  bool exact_remainder = false;
};

struct DevResult {
  std::vector<Interval> head;  // c_0 .. c_{N-1}, enclosing the true coefficients
  bool capped = false;         // stopped by n_max rather than sign loss
};

// Series development in interval arithmetic, stopped at the first coefficient
// whose interval contains 0 without being the exact zero point (its sign is
// no longer determined), or at n_max.  Pre: den constant coefficient interval
// excludes zero.
DevResult develop_until_sign_loss(const IntervalPoly& num, const IntervalPoly& den, size_t n_max);

// r_l1 * (1/|lead(den)|) * prod_i 1/(modulus_lower_i - 1), upward-rounded:
// a bound on ||R/den||_1 for any R with ||R||_1 <= r_l1, via the product of
// the first-order factors' norms.  +inf when some modulus does not exceed 1.
double tail_bound_rough(const IntervalPoly& den, const std::vector<double>& modulus_lowers,
                        double r_l1);

// Exact tail of a second-degree denominator with a conjugate root pair:
// upward-rounded bound on sum_{k>=N} |a_k| for P/Q, Q = q0 + q1 z + q2 z^2
// normalized to q0 = 1, discriminant q1^2 - 4 q2 < 0, |roots| = q2^{-1/2} > 1.
// deg P <= 2.  Throws std::domain_error when the preconditions fail.
double tail_bound_second_order(const Poly& P, const Poly& Q, size_t N);

// Certified upper bound on ||f||_1 (and sup|c_k| alongside).
KernelBound l1_bound(const RatFun& f, const BoundConfig& cfg = {});

// Certified upper bound on sup_k |c_k(f)|.  For denominators divisible by
// (1-z) — constant-source columns — uses sup of partial sums:
// linf(f) <= l1(f * (1-z)).
KernelBound linf_bound(const RatFun& f, const BoundConfig& cfg = {});

}  // namespace filtan
