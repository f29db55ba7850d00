#include "filtan/check.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "filtan/simulate.hpp"

namespace filtan {

namespace {

// Deterministic across standard libraries (uniform_real_distribution is not).
double uniform_pm(std::mt19937_64& rng, double m) {
  double u = static_cast<double>(rng() >> 11) * 0x1p-53;  // [0, 1)
  return m * (2.0 * u - 1.0);
}

}  // namespace

std::string CheckResult::to_string() const {
  std::ostringstream os;
  os << "check: " << trials << " trials x " << steps << " steps, worst |out|/bound = "
     << worst_ratio << (passed ? ", no violations" : "") << "\n";
  for (const CheckViolation& v : violations) {
    os << "VIOLATION output " << v.output << " trial " << v.trial << " step " << v.step
       << ": |" << v.value << "| > " << v.bound << "\n  trace:";
    for (double x : v.trace_prefix) os << " " << x;
    os << "\n";
  }
  return os.str();
}

CheckResult check_network(const FilterNetwork& net_in, const Analysis& a, std::size_t steps,
                          std::uint64_t seed) {
  if (a.fmt.kind != FloatFormat::Kind::ieee64)
    throw std::invalid_argument(
        "check runs the binary64 simulator and needs --format ieee64");
  const FilterNetwork net = net_in.has_blocks ? expand_blocks(net_in) : net_in;

  const std::size_t n_in = net.inputs.size();
  const std::size_t n_out = net.outputs.size();
  CheckResult res;
  res.steps = steps;

  std::vector<double> in_mag(n_in);
  for (std::size_t j = 0; j < n_in; ++j)
    in_mag[j] = std::isfinite(a.in_bounds[j]) ? a.in_bounds[j] : 1.0;
  std::vector<std::string> labels;
  std::vector<double> reset_mag;
  for (const auto& [label, bound] : a.reset_bounds) {
    labels.push_back(label);
    reset_mag.push_back(std::isfinite(bound) ? bound : 1.0);
  }

  auto run_trial = [&](const std::vector<std::vector<double>>& ins,
                       const std::map<std::string, double>& resets) {
    std::vector<std::vector<double>> outs = simulate_binary64(net, ins, resets, steps);
    for (std::size_t i = 0; i < n_out; ++i) {
      double bound = a.bounds[i].bounded ? a.bounds[i].total : fp::kInf;
      if (!std::isfinite(bound)) continue;
      for (std::size_t k = 0; k < steps; ++k) {
        double mag = std::fabs(outs[i][k]);
        if (bound > 0) res.worst_ratio = std::max(res.worst_ratio, mag / bound);
        if (mag > bound) {
          CheckViolation v;
          v.output = net.outputs[i].name;
          v.trial = res.trials;
          v.step = k;
          v.value = outs[i][k];
          v.bound = bound;
          std::size_t n = std::min<std::size_t>(32, steps);
          v.trace_prefix.assign(outs[i].begin(), outs[i].begin() + n);
          res.violations.push_back(std::move(v));
          res.passed = false;
          break;  // one violation per output per trial is enough detail
        }
      }
    }
    ++res.trials;
  };

  std::mt19937_64 rng(seed);
  for (int t = 0; t < 3; ++t) {
    std::vector<std::vector<double>> ins(n_in, std::vector<double>(steps));
    for (std::size_t j = 0; j < n_in; ++j)
      for (std::size_t k = 0; k < steps; ++k) ins[j][k] = uniform_pm(rng, in_mag[j]);
    std::map<std::string, double> resets;
    for (std::size_t s = 0; s < labels.size(); ++s)
      resets[labels[s]] = (rng() & 1) ? reset_mag[s] : -reset_mag[s];
    run_trial(ins, resets);
  }

  // Adversarial trial per output: worst-case sign pattern against the
  // simulated impulse responses, resets sign-matched at the final step.
  std::map<std::string, double> zero_resets;
  for (const std::string& l : labels) zero_resets[l] = 0.0;
  for (std::size_t i = 0; i < n_out; ++i) {
    if (!a.bounds[i].bounded) continue;
    std::vector<std::vector<double>> impulse(n_in, std::vector<double>(steps, 0.0));
    std::vector<std::vector<double>> h(n_in);  // response of output i per input
    for (std::size_t j = 0; j < n_in; ++j) {
      impulse[j][0] = 1.0;
      h[j] = simulate_binary64(net, impulse, zero_resets, steps)[i];
      impulse[j][0] = 0.0;
    }
    std::vector<double> d(labels.size());  // reset responses at the last step
    std::vector<std::vector<double>> silent(n_in, std::vector<double>(steps, 0.0));
    for (std::size_t s = 0; s < labels.size(); ++s) {
      std::map<std::string, double> r = zero_resets;
      r[labels[s]] = 1.0;
      d[s] = simulate_binary64(net, silent, r, steps)[i].back();
    }
    std::size_t last = steps - 1;
    std::vector<std::vector<double>> ins(n_in, std::vector<double>(steps));
    for (std::size_t j = 0; j < n_in; ++j)
      for (std::size_t k = 0; k < steps; ++k)
        ins[j][k] = h[j][last - k] >= 0 ? in_mag[j] : -in_mag[j];
    std::map<std::string, double> resets;
    for (std::size_t s = 0; s < labels.size(); ++s)
      resets[labels[s]] = d[s] >= 0 ? reset_mag[s] : -reset_mag[s];
    run_trial(ins, resets);
  }
  return res;
}

}  // namespace filtan
