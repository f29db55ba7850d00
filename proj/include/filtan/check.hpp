#pragma once

/**
 * Empirical falsification of certified bounds.
 *
 * Runs the binary64 reference simulator against the analyzed bounds: a few
 * random trials plus one adversarial trial per output, whose input streams
 * are sign-matched to the (approximate) impulse response so the convolution
 * peaks inside the simulated window.  Any sample exceeding its certified
 * bound is reported as a violation — if this ever fires, the analyzer is
 * wrong, not the program.
 *
 * Only meaningful for the ieee64 format: the simulator computes in binary64,
 * so bounds certified for other formats (exact, ieee32, fixed) say nothing
 * about these runs.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "filtan/analyze.hpp"

namespace filtan {

struct CheckViolation {
  std::string output;
  std::size_t trial = 0;
  std::size_t step = 0;
  double value = 0.0;
  double bound = 0.0;
  std::vector<double> trace_prefix;  // first samples of the offending stream
};

struct CheckResult {
  bool passed = true;
  std::size_t trials = 0;
  std::size_t steps = 0;
  double worst_ratio = 0.0;  // max |sample| / bound over finite bounds
  std::vector<CheckViolation> violations;
  std::string to_string() const;
};

// Throws std::invalid_argument unless a.fmt is ieee64.
CheckResult check_network(const FilterNetwork& net, const Analysis& a, std::size_t steps,
                          std::uint64_t seed);

}  // namespace filtan
