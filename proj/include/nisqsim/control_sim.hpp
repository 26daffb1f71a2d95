#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nisqsim/program.hpp"
#include "nisqsim/rng.hpp"

namespace nisqsim {

/// Simulated time in integer picoseconds.
using Picoseconds = std::int64_t;

inline double to_ns(Picoseconds t) { return static_cast<double>(t) / 1000.0; }

class ControlConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ControlConfig {
  std::string name = "qcb-baseline";
  double clock_hz = 200e6;
  double lat_1q_ns = 20.0;
  double lat_2q_ns = 40.0;
  double lat_meas_ns = 300.0;
  std::size_t chan_1q = 1;  ///< DA channels per single-qubit gate
  std::size_t chan_2q = 3;  ///< DA channels per CX
  std::optional<std::size_t> da_channels = 3;  ///< nullopt: unlimited
  std::optional<std::size_t> ad_channels = 1;
  std::size_t meas_da = 1;
  std::size_t meas_ad = 1;
  std::vector<double> t1_seconds;  ///< per qubit; missing entries use kDefaultT1Seconds
  double startup_offset_ns = 0.0;

  static constexpr double kDefaultT1Seconds = 50e-6;

  Picoseconds period() const;
  /// Latency rounded up to whole clock cycles.
  Picoseconds cycles_to_ps(double ns) const;
  Picoseconds lat_1q() const { return cycles_to_ps(lat_1q_ns); }
  Picoseconds lat_2q() const { return cycles_to_ps(lat_2q_ns); }
  Picoseconds lat_meas() const { return cycles_to_ps(lat_meas_ns); }
  Picoseconds startup_offset() const;
  /// 5 * T1 of `qubit`, rounded up to whole cycles.
  Picoseconds reset_hold(QubitIndex qubit) const;

  /// Throws ControlConfigError when an op needs more channels than exist or
  /// a value is out of range.
  void validate() const;

  /// "qcb-baseline" or "ibm-experimental".
  static ControlConfig preset(const std::string& name);
};

/// Document keys: preset (base to override), name, clock_hz, lat_1q_ns,
/// lat_2q_ns, lat_meas_ns, chan_1q, chan_2q, da_channels (number or "inf"),
/// ad_channels, meas_da, meas_ad, t1_us, startup_offset_ns.
ControlConfig load_control_config(const nlohmann::json& doc);
/// Accepts a preset name or a path to a config document.
ControlConfig load_control_config(const std::string& preset_or_path);
nlohmann::json to_json(const ControlConfig& config);

struct MeasureEvent {
  std::size_t instruction_index = 0;
  QubitIndex qubit = 0;
  CbitIndex cbit = 0;
  Picoseconds start = 0;
  Picoseconds end = 0;
};

/// Supplies measurement results. on_operation sees every executed U, CX and
/// Reset in dispatch order, so a source can track quantum state.
class OutcomeSource {
 public:
  virtual ~OutcomeSource() = default;
  virtual int next_outcome(const MeasureEvent& event) = 0;
  virtual void on_operation(const QuantumOp& /*op*/) {}
};

class ConstantOutcome : public OutcomeSource {
 public:
  explicit ConstantOutcome(int bit) : bit_(bit) {}
  int next_outcome(const MeasureEvent&) override { return bit_; }

 private:
  int bit_;
};

/// Each result is 1 with probability p.
class RandomOutcome : public OutcomeSource {
 public:
  RandomOutcome(double p, std::uint64_t seed, std::uint64_t trial = 0)
      : p_(p), rng_(Rng::stream(seed, trial, Rng::Domain::kOutcome)) {}
  int next_outcome(const MeasureEvent&) override { return rng_.uniform() < p_ ? 1 : 0; }

 private:
  double p_;
  Rng rng_;
};

using OutcomeSourceFactory = std::function<std::unique_ptr<OutcomeSource>()>;

struct Interval {
  Picoseconds start = 0;
  Picoseconds end = 0;
};

struct InstructionRecord {
  std::size_t index = 0;
  std::string mnemonic;  ///< of the executed op; "If" records use the inner op's mnemonic
  bool conditional = false;
  bool executed = true;  ///< false for a conditional whose guard did not match
  std::vector<QubitIndex> qubits;
  Picoseconds dispatch = 0;
  Picoseconds start = 0;
  Picoseconds end = 0;
  std::vector<std::size_t> da;  ///< DA channel indices held during [start, end)
  std::vector<std::size_t> ad;
};

struct ChannelUsage {
  Picoseconds busy = 0;
  std::vector<Interval> intervals;
};

struct ExecutionStats {
  Picoseconds startup_offset = 0;
  Picoseconds total_time = 0;  ///< startup_offset + latest end
  std::vector<InstructionRecord> records;  ///< program order
  std::vector<ChannelUsage> da;  ///< one per channel (instantiated channels when unlimited)
  std::vector<ChannelUsage> ad;
  bool da_unlimited = false;
  bool ad_unlimited = false;
  std::vector<int> registers;  ///< final classical register
  std::size_t conditionals_fired = 0;
  std::vector<std::string> warnings;

  double total_time_ns() const { return to_ns(total_time); }
  std::uint64_t register_value() const;
};

/// Dispatches instructions in program order. Each op starts once its
/// operand qubits and its channels are free and takes the channels that
/// free up earliest.
ExecutionStats simulate(const Program& program, const ControlConfig& config, OutcomeSource& outcomes);

struct UtilizationRow {
  Interval window;
  double da_utilization = 0.0;  ///< busy DA time / (channels * window length)
  double ad_utilization = 0.0;
  std::size_t active_peak = 0;  ///< most instructions executing at once in the window
};

std::vector<UtilizationRow> utilization_report(const ExecutionStats& stats, const std::vector<Interval>& windows);
/// Back-to-back windows of width `window` covering [0, total_time).
std::vector<UtilizationRow> utilization_report(const ExecutionStats& stats, Picoseconds window);

struct TimelineSegment {
  Interval interval;
  std::size_t active = 0;  ///< instructions executing
  std::size_t queued = 0;  ///< dispatched, waiting for a qubit or channel
  std::size_t da_busy = 0;
  std::size_t ad_busy = 0;
};

/// Piecewise-constant activity over [0, total_time).
std::vector<TimelineSegment> timeline(const ExecutionStats& stats);
std::string timeline_csv(const ExecutionStats& stats);

/// Drops Measure instructions and conditionals guarding one.
Program strip_measurements(const Program& program);

struct SweepPoint {
  std::optional<std::size_t> da_channels;
  Picoseconds with_measure = 0;
  Picoseconds without_measure = 0;
};

/// One simulate run per DA channel count, everything else fixed. Each run
/// draws outcomes from a fresh source (constant 0 when no factory is given).
std::vector<SweepPoint> channel_sweep(const Program& program, const ControlConfig& config,
                                      const std::vector<std::optional<std::size_t>>& da_counts,
                                      const OutcomeSourceFactory& outcomes = {});

/// Smallest finite count in the sweep whose time already equals the
/// unlimited-channel time; nullopt when the sweep has no unlimited point or
/// no finite count reaches it.
std::optional<std::size_t> saturation_point(const std::vector<SweepPoint>& points);

}  // namespace nisqsim
