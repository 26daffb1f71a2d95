#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nisqsim/coupling_graph.hpp"
#include "nisqsim/layering.hpp"
#include "nisqsim/rng.hpp"
#include "nisqsim/state_vector.hpp"

namespace nisqsim {

struct ErrorOperator {
  std::string label;  ///< "X", "Y", "Z" or a user label
  Mat2 matrix;
  double weight = 1.0;  ///< relative share of an error event
};

std::vector<ErrorOperator> default_pauli_operators();

class ErrorModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-qubit and per-edge operation error rates of a device.
///
/// A rate r is the total probability that some error fires at a position; the
/// operator is then chosen in proportion to its weight (r/3 each for the
/// default X, Y, Z set).
struct DeviceErrorModel {
  CouplingGraph coupling;
  std::vector<double> gate1_error;
  std::map<CouplingGraph::Edge, double> cx_error;
  std::vector<double> readout_error;
  std::vector<double> t1_seconds;  ///< infinity when unknown
  std::vector<ErrorOperator> operators = default_pauli_operators();

  std::size_t qubit_count() const { return coupling.qubit_count(); }
  double cx_rate(QubitIndex a, QubitIndex b) const;

  /// Every rate set to `rate` on a fully connected `qubits`-qubit device.
  static DeviceErrorModel uniform(std::size_t qubits, double rate);

  /// Throws ErrorModelError on out-of-range probabilities, mismatched array
  /// sizes, edges on unknown qubits, or non-unitary operators.
  void validate() const;
};

/// Reads the device document:
///   {"qubits": n, "edges": [[i,j],...], "gate1_error": [...], "cx_error": {"i-j": r},
///    "readout_error": [...], "t1_us": [...],
///    "operators": [{"label": "...", "matrix": [8 reals], "weight": w}]}
/// readout_error defaults to 0 and t1 to infinity.
DeviceErrorModel load_device_model(const nlohmann::json& doc);
DeviceErrorModel load_device_model_file(const std::filesystem::path& path);
nlohmann::json to_json(const DeviceErrorModel& model);

struct ErrorPosition {
  enum class Kind { kQuantum, kReadout };
  std::size_t layer = 0;
  QubitIndex qubit = 0;
  std::size_t source_index = 0;  ///< program instruction occupying the slot
  double rate = 0.0;
  Kind kind = Kind::kQuantum;
  CbitIndex cbit = 0;  ///< readout positions only
};

/// One slot per (gate, operand qubit) and per measurement, ordered by (layer, qubit).
std::vector<ErrorPosition> error_positions(const LayeredCircuit& circuit, const DeviceErrorModel& model);

/// Outcome of sampling one position: an operator index into
/// DeviceErrorModel::operators, a readout flip, or nothing.
struct Injection {
  enum class Kind { kNone, kOperator, kFlip };
  Kind kind = Kind::kNone;
  std::size_t operator_index = 0;

  static Injection none() { return {}; }
  static Injection flip() { return {Kind::kFlip, 0}; }
  static Injection op(std::size_t i) { return {Kind::kOperator, i}; }
  bool operator==(const Injection&) const = default;
};

/// Probability of each operator at a position with total rate `rate`.
std::vector<double> operator_probabilities(double rate, const std::vector<ErrorOperator>& operators);

/// Draws exactly one uniform from `rng`.
Injection sample_injection(const ErrorPosition& position, const std::vector<ErrorOperator>& operators, Rng& rng);

}  // namespace nisqsim
