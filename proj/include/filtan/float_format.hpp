#pragma once

/**
 * Arithmetic formats for the realized (rounded) filter.  Every elementary
 * operation the implementation performs is modeled as
 *     fl(x) = x (1 + d) + a,   |d| <= eps_rel,  |a| <= eps_abs,
 * which covers IEEE round-to-nearest (eps_rel = u, eps_abs the subnormal
 * floor) and fixed-point grids (eps_rel = 0, eps_abs the quantum).
 */

#include <string>

namespace filtan {

struct FloatFormat {
  enum class Kind { exact, ieee32, ieee64, fixed };

  Kind kind = Kind::ieee64;
  double eps_rel = 0x1p-53;
  double eps_abs = 0x1p-1074;
  double quantum = 0.0;  // fixed-point grid spacing (Kind::fixed only)

  static FloatFormat exact() { return {Kind::exact, 0.0, 0.0, 0.0}; }
  static FloatFormat ieee64() { return {Kind::ieee64, 0x1p-53, 0x1p-1074, 0.0}; }
  static FloatFormat ieee32() { return {Kind::ieee32, 0x1p-24, 0x1p-149, 0.0}; }
  // Truncating fixed point loses up to one quantum per rounded operation;
  // round-to-nearest halves that.
  static FloatFormat fixed_point(double delta, bool round_to_nearest = false);

  // "exact" | "ieee32" | "ieee64" | "fixed:<delta>[:rne]"
  static FloatFormat parse(const std::string& text);
  std::string to_string() const;
};

}  // namespace filtan
