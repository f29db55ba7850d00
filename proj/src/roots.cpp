#include "filtan/roots.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace filtan {

std::vector<std::complex<double>> approx_roots(const IntervalPoly& p) {
  std::vector<double> c = p.midpoints();
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  if (c.size() <= 1) return {};
  size_t n = c.size() - 1;

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (size_t i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (size_t i = 0; i < n; ++i) companion(i, n - 1) = -c[i] / c[n];

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
  std::vector<std::complex<double>> roots(n);
  for (size_t i = 0; i < n; ++i) roots[i] = solver.eigenvalues()(i);
  return roots;
}

namespace {

double abs_lower(std::complex<double> x) {
  Interval m2 = Interval(x.real()) * Interval(x.real()) + Interval(x.imag()) * Interval(x.imag());
  return filtan::sqrt(m2).lo;
}

RootCertification cauchy_fallback(const IntervalPoly& p, std::string why) {
  RootCertification cert;
  cert.per_root_discs = false;
  cert.common_modulus_lower = cauchy_modulus_lower(p);
  cert.note = std::move(why);
  return cert;
}

}  // namespace

RootCertification certify_roots(const IntervalPoly& p,
                                const std::vector<std::complex<double>>& approx) {
  int deg = p.degree();
  while (deg >= 0 && p.coeff(deg).contains_zero() && p.coeff(deg).is_point()) --deg;
  if (deg <= 0) {
    RootCertification cert;
    cert.note = "constant polynomial: no roots";
    return cert;
  }
  if (p.coeff(deg).contains_zero())
    return cauchy_fallback(p, "leading coefficient may vanish: certification failed");
  if (approx.size() != static_cast<size_t>(deg))
    return cauchy_fallback(p, "clustered roots: certification failed");

  size_t n = static_cast<size_t>(deg);
  CInterval lead(p.coeff(n), Interval(0.0));
  RootCertification cert;
  cert.roots.reserve(n);
  try {
    for (size_t j = 0; j < n; ++j) {
      CInterval xj(Interval(approx[j].real()), Interval(approx[j].imag()));
      // w = n * P(x_j) / (p_n * prod_{k != j} (x_j - x_k)); the true roots lie,
      // up to permutation, in discs around x_j whose radius bounds 2|w|.
      CInterval denom = lead;
      for (size_t k = 0; k < n; ++k) {
        if (k == j) continue;
        CInterval xk(Interval(approx[k].real()), Interval(approx[k].imag()));
        denom = denom * (xj - xk);
      }
      CInterval w = div(p.eval(xj) * CInterval(Interval(double(n)), Interval(0.0)), denom);
      double radius = fp::mul_up(2.0, w.abs_up());
      if (!std::isfinite(radius))
        return cauchy_fallback(p, "clustered roots: certification failed");
      RootEnclosure e;
      e.center = approx[j];
      e.radius = radius;
      e.modulus_lower = std::max(0.0, fp::sub_down(abs_lower(approx[j]), radius));
      cert.roots.push_back(e);
    }
  } catch (const std::domain_error&) {
    // Division by a box containing zero: coincident approximations.
    return cauchy_fallback(p, "clustered roots: certification failed");
  }
  cert.per_root_discs = true;
  cert.common_modulus_lower = cert.roots.empty() ? 0.0 : cert.roots.front().modulus_lower;
  for (const RootEnclosure& e : cert.roots)
    cert.common_modulus_lower = std::min(cert.common_modulus_lower, e.modulus_lower);
  return cert;
}

double cauchy_modulus_lower(const IntervalPoly& q) {
  int deg = q.degree();
  if (deg < 0) return 0.0;
  double c0 = q.coeff(0).mig();
  if (c0 == 0.0) return 0.0;
  if (deg == 0) return fp::kInf;  // no roots at all: any lower bound holds

  auto excludes = [&](double r) {
    // Upward evaluation of sum_{k>=1} sup|q_k| r^k.
    double acc = 0.0;
    double rk = 1.0;
    for (int k = 1; k <= deg; ++k) {
      rk = fp::mul_up(rk, r);
      acc = fp::add_up(acc, fp::mul_up(q.coeff(k).mag(), rk));
    }
    return acc < c0;
  };

  if (!excludes(0x1p-60)) return 0.0;
  double lo = 0x1p-60, hi = lo;
  while (excludes(hi * 2) && hi < 0x1p40) hi *= 2;
  lo = hi;
  hi = hi * 2;
  for (int i = 0; i < 80 && fp::next_up(lo) < hi; ++i) {
    double mid = lo + 0.5 * (hi - lo);
    if (excludes(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace filtan
