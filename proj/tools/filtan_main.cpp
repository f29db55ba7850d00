// filtan: certified worst-case output bounds for linear digital filter
// networks.  Exit codes: 0 analyzed and bounded (or bound not requested),
// 2 unbounded/unstable under --strict or unsolvable system, 3 unreadable or
// unparsable input, 4 check violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "filtan/analyze.hpp"
#include "filtan/check.hpp"
#include "filtan/network.hpp"
#include "filtan/report.hpp"

namespace {

int run_analyze(const std::string& file, std::string format_opt, bool format_given,
                const std::string& report_kind, const std::string& out_path,
                std::size_t dev_max, std::size_t degree_cap, unsigned quantize_bits,
                bool strict, bool do_check, std::size_t steps, std::uint64_t seed,
                unsigned jobs) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << file << ": cannot open\n";
    return 3;
  }
  std::ostringstream buf;
  buf << in.rdbuf();

  filtan::FilterNetwork net;
  try {
    net = filtan::parse_network(buf.str());
  } catch (const filtan::ParseError& e) {
    std::cerr << file << ":" << e.what() << "\n";
    return 3;
  }

  filtan::FloatFormat fmt;
  try {
    // Explicit --format wins over an in-file `format ...;` line.
    std::string name = format_given ? format_opt : (net.has_format ? net.format : format_opt);
    fmt = filtan::FloatFormat::parse(name);
  } catch (const std::exception& e) {
    std::cerr << "format: " << e.what() << "\n";
    return 3;
  }

  filtan::BoundConfig cfg;
  cfg.n_max = dev_max;
  cfg.degree_cap = degree_cap;

  filtan::Analysis a;
  try {
    a = filtan::analyze_network(net, fmt, cfg, quantize_bits, jobs);
  } catch (const std::exception& e) {
    // Unsolvable or non-contracting systems have no sound report.
    std::cerr << "analysis error: " << e.what() << "\n";
    return 2;
  }

  std::string rendered =
      report_kind == "json" ? filtan::report_json(a) : filtan::report_text(a);
  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << out_path << ": cannot write\n";
      return 3;
    }
    out << rendered;
  }
  if (report_kind == "json")  // keep the JSON stream deterministic
    std::cerr << "elapsed: " << a.elapsed_seconds << " s\n";

  bool all_bounded = true;
  for (const filtan::OutputBound& b : a.bounds) all_bounded = all_bounded && b.bounded;

  if (do_check) {
    filtan::CheckResult res;
    try {
      res = filtan::check_network(net, a, steps, seed);
    } catch (const std::exception& e) {
      std::cerr << "check: " << e.what() << "\n";
      return 1;
    }
    std::cerr << res.to_string();
    if (!res.passed) return 4;
  }
  if (strict && !all_bounded) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified worst-case bounds for linear digital filter networks"};
  app.require_subcommand(1);

  std::string file, format = "ieee64", report_kind = "text", out_path;
  std::size_t dev_max = 4096, degree_cap = 64, steps = 10000;
  unsigned quantize_bits = 512, jobs = 1;
  std::uint64_t seed = 1;
  bool strict = false, do_check = false;

  CLI::App* cmd = app.add_subcommand("analyze", "analyze a filter network file");
  cmd->add_option("file", file, "network source file")->required();
  auto* fmt_opt =
      cmd->add_option("--format", format, "exact | ieee32 | ieee64 | fixed:<delta>[:rne]");
  cmd->add_option("--report", report_kind, "report style")
      ->check(CLI::IsMember({"json", "text"}));
  cmd->add_option("--out", out_path, "write the report to a file instead of stdout");
  cmd->add_option("--dev-max", dev_max, "series development cap per kernel");
  cmd->add_option("--degree-cap", degree_cap, "max transfer num/den degree");
  cmd->add_option("--quantize-bits", quantize_bits,
                  "coefficient bit budget before dyadic quantization (0 = never)");
  cmd->add_flag("--strict", strict, "exit 2 when some output is unbounded");
  cmd->add_flag("--check", do_check, "falsify the bounds with binary64 simulations");
  cmd->add_option("--steps", steps, "simulation steps per check trial");
  cmd->add_option("--seed", seed, "check RNG seed");
  cmd->add_option("--jobs", jobs, "parallel kernel workers");

  CLI11_PARSE(app, argc, argv);
  return run_analyze(file, format, fmt_opt->count() > 0, report_kind, out_path, dev_max,
                     degree_cap, quantize_bits, strict, do_check, steps, seed, jobs);
}
