#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nisqsim/report.hpp"

namespace nisqsim {

/// Inputs of one command-line experiment.
struct ExperimentSpec {
  std::string command;
  std::vector<std::string> programs;
  std::string device;                    ///< device error-model file; empty when not given
  std::string control = "qcb-baseline";  ///< preset name or control config file
  std::vector<std::uint64_t> trials{1024};
  std::uint64_t seed = 1;
  std::string engine = "optimized";
  std::vector<std::optional<std::size_t>> da_channels;  ///< nullopt entries mean unlimited
  bool no_measure = false;
  std::string format = "text";
  std::string out;
  double window_ns = 0.0;  ///< utilization window; 0 picks the single-qubit gate latency
  std::uint64_t init = 0;  ///< initial basis state for cosim

  nlohmann::json to_json() const;
};

Report cmd_noise(const ExperimentSpec& spec);
Report cmd_savings(const ExperimentSpec& spec);
Report cmd_timing(const ExperimentSpec& spec);
Report cmd_sweep(const ExperimentSpec& spec);
Report cmd_cosim(const ExperimentSpec& spec);
Report cmd_compare(const ExperimentSpec& spec);
Report run_experiment(const ExperimentSpec& spec);

/// Parses "3", "inf" or "unlimited".
std::optional<std::size_t> parse_channel_count(const std::string& text);

/// Entry point behind the executable; `args` excludes the program name.
/// Returns 0 on success, 2 on usage errors and 1 on any other failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nisqsim
