#pragma once

/**
 * Root localization for denominator polynomials.
 *
 * approx_roots carries no soundness claim (companion-matrix eigenvalues of
 * the midpoint polynomial).  certify_roots turns the approximations into
 * closed discs that provably contain the true roots (up to permutation, for
 * every concrete polynomial inside the interval family), with a certified
 * lower bound on each root's modulus; when the disc computation degenerates
 * (clustered or wildly inaccurate approximations), it falls back to a single
 * Cauchy-type lower bound common to all roots.
 */

#include <complex>
#include <string>
#include <vector>

#include "filtan/interval_poly.hpp"

namespace filtan {

struct RootEnclosure {
  std::complex<double> center;
  double radius = 0.0;
  double modulus_lower = 0.0;  // certified: the enclosed root xi has |xi| >= modulus_lower
};

struct RootCertification {
  std::vector<RootEnclosure> roots;
  bool per_root_discs = true;  // false: discs failed, common_modulus_lower is the only certificate
  double common_modulus_lower = 0.0;
  std::string note;
};

// Eigenvalues of the companion matrix of the midpoint polynomial.
// Pre: positive degree after dropping a (near-)zero leading interval.
std::vector<std::complex<double>> approx_roots(const IntervalPoly& p);

// Rump-style certification of the given approximations against the interval
// polynomial.  Needs deg(p) approximations and a leading coefficient interval
// that excludes zero; otherwise, or on clustered approximations, the result
// degrades to the common Cauchy bound with note "clustered roots:
// certification failed".
RootCertification certify_roots(const IntervalPoly& p,
                                const std::vector<std::complex<double>>& approx);

// Largest r (downward-rounded) with sum_{k>=1} sup|q_k| r^k < inf|q_0|:
// every root of every member polynomial has modulus > r.  Returns 0 when the
// constant coefficient may vanish.
double cauchy_modulus_lower(const IntervalPoly& q);

}  // namespace filtan
