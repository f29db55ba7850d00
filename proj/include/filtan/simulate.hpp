#pragma once

/**
 * Reference execution of filter networks, step by step.
 *
 * The binary64 simulator realizes exactly the operation sequence the error
 * model charges for: coefficients are stored as nearest doubles, each term
 * with coefficient outside {1, -1} costs one rounded multiplication, terms
 * are summed left to right, and every n-step delay owns n cells loaded with
 * fl(scale * reset) at the start.  The exact simulator performs the same
 * schedule in rational arithmetic and is the oracle for transfer-series
 * coefficients: feeding a unit impulse into one input with all resets zero
 * reproduces that column of T coefficient by coefficient.
 *
 * Blocks-form networks are expanded to equations first.
 */

#include <map>
#include <string>
#include <vector>

#include "filtan/network.hpp"

namespace filtan {

// inputs[j] is the stream for declared input j and must hold >= steps values;
// resets must contain every declared reset label.  Returns one stream of
// `steps` values per declared output.
std::vector<std::vector<double>> simulate_binary64(const FilterNetwork& net,
                                                   const std::vector<std::vector<double>>& inputs,
                                                   const std::map<std::string, double>& resets,
                                                   size_t steps);

std::vector<std::vector<Rat>> simulate_exact(const FilterNetwork& net,
                                             const std::vector<std::vector<Rat>>& inputs,
                                             const std::map<std::string, Rat>& resets,
                                             size_t steps);

}  // namespace filtan
