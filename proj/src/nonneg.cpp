#include "filtan/nonneg.hpp"

#include <cmath>
#include <stdexcept>

namespace filtan {

void NonnegMatrix::check(double v) {
  if (std::isnan(v) || v < 0.0)
    throw std::invalid_argument("nonnegative matrix entry must be >= 0 and not NaN");
}

bool NonnegMatrix::all_finite() const {
  for (double v : e_)
    if (!std::isfinite(v)) return false;
  return true;
}

NonnegMatrix NonnegMatrix::hcat(const NonnegMatrix& a, const NonnegMatrix& b) {
  if (a.rows_ != b.rows_) throw std::invalid_argument("hcat shape mismatch");
  NonnegMatrix r(a.rows_, a.cols_ + b.cols_);
  for (size_t i = 0; i < a.rows_; ++i) {
    for (size_t j = 0; j < a.cols_; ++j) r.at(i, j) = a.at(i, j);
    for (size_t j = 0; j < b.cols_; ++j) r.at(i, a.cols_ + j) = b.at(i, j);
  }
  return r;
}

NonnegMatrix NonnegMatrix::columns(size_t first, size_t count) const {
  if (first + count > cols_) throw std::invalid_argument("column slice out of range");
  NonnegMatrix r(rows_, count);
  for (size_t i = 0; i < rows_; ++i)
    for (size_t j = 0; j < count; ++j) r.at(i, j) = at(i, first + j);
  return r;
}

NonnegMatrix add_up(const NonnegMatrix& a, const NonnegMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matrix addition shape mismatch");
  NonnegMatrix r(a.rows(), a.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) r.at(i, j) = fp::add_up(a.at(i, j), b.at(i, j));
  return r;
}

NonnegMatrix mul_up(const NonnegMatrix& a, const NonnegMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
  NonnegMatrix r(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t k = 0; k < a.cols(); ++k) {
      double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (size_t j = 0; j < b.cols(); ++j)
        r.at(i, j) = fp::add_up(r.at(i, j), fp::mul_up(aik, b.at(k, j)));
    }
  return r;
}

NonnegMatrix scale_up(const NonnegMatrix& a, double k) {
  NonnegMatrix r(a.rows(), a.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) r.at(i, j) = fp::mul_up(a.at(i, j), k);
  return r;
}

std::vector<double> mul_up(const NonnegMatrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector shape mismatch");
  std::vector<double> r(a.rows(), 0.0);
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j)
      if (a.at(i, j) != 0.0 && x[j] != 0.0)
        r[i] = fp::add_up(r[i], fp::mul_up(a.at(i, j), x[j]));
  return r;
}

double subordinate_inf_norm(const NonnegMatrix& a) {
  double norm = 0.0;
  for (size_t i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (size_t j = 0; j < a.cols(); ++j) row = fp::add_up(row, a.at(i, j));
    norm = std::fmax(norm, row);
  }
  return norm;
}

std::vector<double> fixpoint_upper_bound(const NonnegMatrix& K1, const std::vector<double>& y) {
  if (K1.rows() != K1.cols() || K1.rows() != y.size())
    throw std::invalid_argument("fixpoint shape mismatch");
  const size_t n = y.size();
  for (double v : y)
    if (std::isnan(v) || v < 0.0) throw std::invalid_argument("fixpoint rhs must be >= 0");

  double norm = subordinate_inf_norm(K1);
  if (!(norm < 1.0)) throw std::domain_error("error feedback not contracting");

  const int iters = 64;
  std::vector<double> d = y;
  for (int k = 0; k < iters; ++k) {
    std::vector<double> kd = mul_up(K1, d);
    for (size_t i = 0; i < n; ++i) d[i] = fp::add_up(kd[i], y[i]);
  }

  double ymax = 0.0;
  for (double v : y) ymax = std::fmax(ymax, v);
  double pow_norm = 1.0;
  for (int k = 0; k <= iters; ++k) pow_norm = fp::mul_up(pow_norm, norm);
  double tail = fp::div_up(fp::mul_up(pow_norm, ymax), fp::sub_down(1.0, norm));

  std::vector<double> B(n);
  for (size_t i = 0; i < n; ++i) B[i] = fp::add_up(d[i], tail);

  // Certificate: up(K1*B + y) <= B componentwise; widen and retry if the
  // tail estimate was too optimistic at this rounding granularity.  The
  // widening is relative plus an absolute subnormal-scale bump: every
  // up-rounded product contributes at least one ulp (2^-1074), so a row
  // whose true value is deep-subnormal can sit up to n ulps below its
  // recomputed check value, out of reach of any relative factor.
  const double bump = fp::mul_up(static_cast<double>(n), 0x1p-1074);
  for (int attempt = 0; attempt <= 12; ++attempt) {
    std::vector<double> kb = mul_up(K1, B);
    bool ok = true;
    for (size_t i = 0; i < n; ++i)
      if (fp::add_up(kb[i], y[i]) > B[i]) {
        ok = false;
        break;
      }
    if (ok) return B;
    for (size_t i = 0; i < n; ++i)
      B[i] = fp::add_up(fp::mul_up(B[i], 1.0 + 0x1p-20), bump);
  }
  throw std::runtime_error("fixpoint certificate failed after widening retries");
}

}  // namespace filtan
