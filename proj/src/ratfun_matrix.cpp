#include "filtan/ratfun_matrix.hpp"

#include <stdexcept>

namespace filtan {

RatFunMatrix RatFunMatrix::identity(size_t n) {
  RatFunMatrix m(n, n);
  for (size_t i = 0; i < n; ++i) m.at(i, i) = RatFun(1);
  return m;
}

RatFunMatrix operator+(const RatFunMatrix& a, const RatFunMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw std::invalid_argument("matrix addition shape mismatch");
  RatFunMatrix r(a.rows_, a.cols_);
  for (size_t i = 0; i < a.e_.size(); ++i) r.e_[i] = a.e_[i] + b.e_[i];
  return r;
}

RatFunMatrix operator*(const RatFunMatrix& a, const RatFunMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
  RatFunMatrix r(a.rows_, b.cols_);
  for (size_t i = 0; i < a.rows_; ++i)
    for (size_t k = 0; k < a.cols_; ++k) {
      const RatFun& aik = a.at(i, k);
      if (aik.is_zero()) continue;
      for (size_t j = 0; j < b.cols_; ++j) {
        const RatFun& bkj = b.at(k, j);
        if (bkj.is_zero()) continue;
        r.at(i, j) = r.at(i, j) + aik * bkj;
      }
    }
  return r;
}

RatFunMatrix RatFunMatrix::scaled(const RatFun& k) const {
  RatFunMatrix r(rows_, cols_);
  for (size_t i = 0; i < e_.size(); ++i) r.e_[i] = e_[i] * k;
  return r;
}

RatFunMatrix RatFunMatrix::hcat(const RatFunMatrix& a, const RatFunMatrix& b) {
  if (a.rows_ != b.rows_) throw std::invalid_argument("hcat shape mismatch");
  RatFunMatrix r(a.rows_, a.cols_ + b.cols_);
  for (size_t i = 0; i < a.rows_; ++i) {
    for (size_t j = 0; j < a.cols_; ++j) r.at(i, j) = a.at(i, j);
    for (size_t j = 0; j < b.cols_; ++j) r.at(i, a.cols_ + j) = b.at(i, j);
  }
  return r;
}

RatFunMatrix RatFunMatrix::columns(size_t first, size_t count) const {
  if (first + count > cols_) throw std::invalid_argument("column slice out of range");
  RatFunMatrix r(rows_, count);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < count; ++j) r.at(i, j) = at(i, first + j);
  return r;
}

namespace {

// Gauss-Jordan elimination over the fraction field, in place on [M | B].
// Pivot choice: among rows at or below the current one with a structurally
// nonzero entry in the pivot column, the first one minimizing
// deg(num) + deg(den), which keeps the exact arithmetic small.
// Returns false if some column has no pivot (singular).
bool eliminate(RatFunMatrix& m, size_t unknowns) {
  size_t n = m.rows();
  if (unknowns > m.cols() || unknowns != n) return false;
  for (size_t col = 0; col < unknowns; ++col) {
    size_t best = n;
    int best_deg = 0;
    for (size_t r = col; r < n; ++r) {
      const RatFun& e = m.at(r, col);
      if (e.is_zero()) continue;
      int d = e.num().degree() + e.den().degree();
      if (best == n || d < best_deg) {
        best = r;
        best_deg = d;
      }
    }
    if (best == n) return false;
    if (best != col)
      for (size_t j = 0; j < m.cols(); ++j) std::swap(m.at(col, j), m.at(best, j));

    RatFun inv_pivot = RatFun(1) / m.at(col, col);
    for (size_t j = col; j < m.cols(); ++j) m.at(col, j) = m.at(col, j) * inv_pivot;
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      RatFun f = m.at(r, col);
      if (f.is_zero()) continue;
      for (size_t j = col; j < m.cols(); ++j)
        m.at(r, j) = m.at(r, j) - f * m.at(col, j);
    }
  }
  return true;
}

}  // namespace

RatFunMatrix solve_linear_system(const RatFunMatrix& M, const RatFunMatrix& B) {
  if (M.rows() != B.rows()) throw std::invalid_argument("system shape mismatch");
  if (M.rows() != M.cols()) throw std::domain_error("no unique solution");
  RatFunMatrix aug = RatFunMatrix::hcat(M, B);
  if (!eliminate(aug, M.cols())) throw std::domain_error("no unique solution");
  RatFunMatrix X = aug.columns(M.cols(), B.cols());
  for (size_t i = 0; i < X.rows(); ++i)
    for (size_t j = 0; j < X.cols(); ++j)
      if (!X.at(i, j).causal()) throw std::domain_error("non-causal system");
  return X;
}

RatFunMatrix invert_id_minus_zA(const RatFunMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("invert_id_minus_zA needs a square matrix");
  size_t n = A.rows();
  RatFunMatrix M(n, n);
  RatFun zf = RatFun::z();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      RatFun v = -(zf * A.at(i, j));
      if (i == j) v = v + RatFun(1);
      M.at(i, j) = v;
    }
  RatFunMatrix aug = RatFunMatrix::hcat(M, RatFunMatrix::identity(n));
  if (!eliminate(aug, n))
    throw std::logic_error("id - z*A elimination failed; matrix should be invertible");
  RatFunMatrix inv = aug.columns(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (!inv.at(i, j).causal())
        throw std::logic_error("id - z*A inverse left the causal ring unexpectedly");
  return inv;
}

}  // namespace filtan
