#pragma once

/**
 * Upward-rounded nonnegative matrices of certified upper bounds, and the
 * fixpoint machinery that turns a contracting error-propagation matrix K1
 * into a certified componentwise bound B >= K1*B + y.
 */

#include <vector>

#include "filtan/interval.hpp"

namespace filtan {

// Entries are upper bounds: >= 0, +inf allowed as "unbounded" marker, no NaN.
class NonnegMatrix {
 public:
  NonnegMatrix() = default;
  NonnegMatrix(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), e_(rows * cols, fill) {
    check(fill);
  }

  static NonnegMatrix identity(size_t n) {
    NonnegMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  double& at(size_t r, size_t c) { return e_[r * cols_ + c]; }
  double at(size_t r, size_t c) const { return e_[r * cols_ + c]; }
  void set(size_t r, size_t c, double v) {
    check(v);
    e_[r * cols_ + c] = v;
  }
  bool all_finite() const;

  static NonnegMatrix hcat(const NonnegMatrix& a, const NonnegMatrix& b);
  NonnegMatrix columns(size_t first, size_t count) const;

 private:
  static void check(double v);
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> e_;
};

// All products and sums rounded toward +infinity.
NonnegMatrix add_up(const NonnegMatrix& a, const NonnegMatrix& b);
NonnegMatrix mul_up(const NonnegMatrix& a, const NonnegMatrix& b);
NonnegMatrix scale_up(const NonnegMatrix& a, double k);
std::vector<double> mul_up(const NonnegMatrix& a, const std::vector<double>& x);

// Subordinate infinity norm: max_i sum_j |a_ij|, upward-rounded.
double subordinate_inf_norm(const NonnegMatrix& a);

/**
 * Certified B with K1*B + y <= B componentwise (upward-rounded check), via
 * n iterations of the affine map plus a geometric tail:
 *   d_0 = y,  d_{k+1} = up(K1 d_k + y),
 *   B = d_n + up(|K1|^{n+1} / (1 - |K1|)) * up(|y|_inf) * ones.
 * The post-check is evaluated inside the routine; on failure B is widened by
 * (1 + 2^-20) and re-checked, at most eight times.
 *
 * Throws std::domain_error("error feedback not contracting") unless
 * subordinate_inf_norm(K1) < 1.
 */
std::vector<double> fixpoint_upper_bound(const NonnegMatrix& K1, const std::vector<double>& y);

}  // namespace filtan
