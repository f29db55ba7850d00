#pragma once

/**
 * Dense matrices over the fraction field of rational functions, with the
 * exact Gaussian elimination used to close feedback loops and to solve
 * network equation systems.
 */

#include <vector>

#include "filtan/ratfun.hpp"

namespace filtan {

class RatFunMatrix {
 public:
  RatFunMatrix() = default;
  RatFunMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

  static RatFunMatrix identity(size_t n);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  RatFun& at(size_t r, size_t c) { return e_[r * cols_ + c]; }
  const RatFun& at(size_t r, size_t c) const { return e_[r * cols_ + c]; }

  friend RatFunMatrix operator+(const RatFunMatrix& a, const RatFunMatrix& b);
  friend RatFunMatrix operator*(const RatFunMatrix& a, const RatFunMatrix& b);
  RatFunMatrix scaled(const RatFun& k) const;
  friend bool operator==(const RatFunMatrix& a, const RatFunMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
  }

  // Horizontal concatenation [a | b].
  static RatFunMatrix hcat(const RatFunMatrix& a, const RatFunMatrix& b);
  RatFunMatrix columns(size_t first, size_t count) const;

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<RatFun> e_;
};

// Exact inverse of (Id - z*A).  Always invertible for causal A (the
// determinant has constant term 1); elimination failure aborts loudly.
RatFunMatrix invert_id_minus_zA(const RatFunMatrix& A);

// Solves M*X = B exactly over the fraction field.  Throws
// std::domain_error("no unique solution") when M is singular and
// std::domain_error("non-causal system") when some solution entry has a
// denominator vanishing at 0.
RatFunMatrix solve_linear_system(const RatFunMatrix& M, const RatFunMatrix& B);

}  // namespace filtan
