#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "nisqsim/error_model.hpp"

namespace nisqsim {

using nlohmann::json;

std::vector<ErrorOperator> default_pauli_operators() {
  return {{"X", pauli_x(), 1.0}, {"Y", pauli_y(), 1.0}, {"Z", pauli_z(), 1.0}};
}

double DeviceErrorModel::cx_rate(QubitIndex a, QubitIndex b) const {
  const auto it = cx_error.find(CouplingGraph::normalize(a, b));
  if (it == cx_error.end()) throw ErrorModelError(fmt::format("no CX error rate for pair ({},{})", a, b));
  return it->second;
}

DeviceErrorModel DeviceErrorModel::uniform(std::size_t qubits, double rate) {
  DeviceErrorModel m;
  m.coupling = CouplingGraph(qubits);
  for (QubitIndex a = 0; a < qubits; ++a) {
    for (QubitIndex b = a + 1; b < qubits; ++b) {
      m.coupling.add_edge(a, b);
      m.cx_error[{a, b}] = rate;
    }
  }
  m.gate1_error.assign(qubits, rate);
  m.readout_error.assign(qubits, rate);
  m.t1_seconds.assign(qubits, std::numeric_limits<double>::infinity());
  m.validate();
  return m;
}

void DeviceErrorModel::validate() const {
  const std::size_t n = qubit_count();
  auto check_rate = [](double r, const std::string& what) {
    if (!(r >= 0.0 && r <= 1.0)) throw ErrorModelError(fmt::format("{} = {} is not a probability in [0,1]", what, r));
  };
  auto check_array = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != n) throw ErrorModelError(fmt::format("{} has {} entries; device has {} qubits", name, v.size(), n));
  };
  check_array(gate1_error, "gate1_error");
  check_array(readout_error, "readout_error");
  check_array(t1_seconds, "t1");
  for (std::size_t q = 0; q < n; ++q) {
    check_rate(gate1_error[q], fmt::format("gate1_error[{}]", q));
    check_rate(readout_error[q], fmt::format("readout_error[{}]", q));
    if (!(t1_seconds[q] > 0.0)) throw ErrorModelError(fmt::format("t1[{}] must be positive", q));
  }
  for (const auto& [a, b] : coupling.edges()) {
    if (a >= n || b >= n) throw ErrorModelError(fmt::format("edge ({},{}) references an unknown qubit", a, b));
    if (a == b) throw ErrorModelError(fmt::format("edge ({},{}) is a self loop", a, b));
    if (cx_error.count({a, b}) == 0) throw ErrorModelError(fmt::format("edge ({},{}) has no cx_error", a, b));
  }
  for (const auto& [edge, rate] : cx_error) {
    if (!coupling.connected(edge.first, edge.second)) {
      throw ErrorModelError(fmt::format("cx_error given for ({},{}), which is not an edge", edge.first, edge.second));
    }
    check_rate(rate, fmt::format("cx_error[{}-{}]", edge.first, edge.second));
  }
  if (operators.empty()) throw ErrorModelError("operator set is empty");
  for (const auto& op : operators) {
    if (!is_unitary(op.matrix)) throw ErrorModelError(fmt::format("error operator '{}' is not unitary", op.label));
    if (!(op.weight > 0.0) || !std::isfinite(op.weight)) {
      throw ErrorModelError(fmt::format("error operator '{}' needs a positive weight", op.label));
    }
  }
}

namespace {

std::vector<double> rate_array(const json& doc, const char* key, std::size_t n, std::optional<double> fallback) {
  if (!doc.contains(key)) {
    if (!fallback) throw ErrorModelError(fmt::format("device document is missing '{}'", key));
    return std::vector<double>(n, *fallback);
  }
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw ErrorModelError(fmt::format("'{}' must be an array", key));
  std::vector<double> out;
  for (const auto& v : arr) {
    if (v.is_null()) {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    if (!v.is_number()) throw ErrorModelError(fmt::format("'{}' must contain numbers", key));
    out.push_back(v.get<double>());
  }
  return out;
}

CouplingGraph::Edge parse_edge_key(const std::string& key) {
  const auto dash = key.find('-');
  if (dash == std::string::npos) throw ErrorModelError(fmt::format("cx_error key '{}' is not of the form i-j", key));
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const auto a = std::stoul(key.substr(0, dash), &used_a);
    const auto b = std::stoul(key.substr(dash + 1), &used_b);
    if (used_a != dash || used_b != key.size() - dash - 1) throw std::invalid_argument(key);
    return CouplingGraph::normalize(static_cast<QubitIndex>(a), static_cast<QubitIndex>(b));
  } catch (const std::logic_error&) {
    throw ErrorModelError(fmt::format("cx_error key '{}' is not of the form i-j", key));
  }
}

}  // namespace

DeviceErrorModel load_device_model(const json& doc) {
  try {
    if (!doc.is_object()) throw ErrorModelError("device document must be an object");
    if (!doc.contains("qubits") || !doc.at("qubits").is_number_unsigned()) {
      throw ErrorModelError("device document needs a non-negative integer 'qubits'");
    }
    const auto n = doc.at("qubits").get<std::size_t>();
    DeviceErrorModel m;
    m.coupling = CouplingGraph(n);
    for (const auto& e : doc.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
        throw ErrorModelError("each edge must be a pair of qubit indices");
      }
      const auto a = e[0].get<QubitIndex>();
      const auto b = e[1].get<QubitIndex>();
      if (a >= n || b >= n) throw ErrorModelError(fmt::format("edge ({},{}) references an unknown qubit", a, b));
      m.coupling.add_edge(a, b);
    }
    m.gate1_error = rate_array(doc, "gate1_error", n, std::nullopt);
    m.readout_error = rate_array(doc, "readout_error", n, 0.0);
    m.t1_seconds = rate_array(doc, "t1_us", n, std::numeric_limits<double>::infinity());
    for (double& t : m.t1_seconds) t *= 1e-6;
    if (doc.contains("cx_error")) {
      const auto& cx = doc.at("cx_error");
      if (!cx.is_object()) throw ErrorModelError("'cx_error' must be an object keyed by \"i-j\"");
      for (const auto& [key, value] : cx.items()) {
        if (!value.is_number()) throw ErrorModelError(fmt::format("cx_error['{}'] must be a number", key));
        const auto edge = parse_edge_key(key);
        if (edge.first >= n || edge.second >= n) {
          throw ErrorModelError(fmt::format("cx_error key '{}' references an unknown qubit", key));
        }
        m.cx_error[edge] = value.get<double>();
      }
    }
    if (doc.contains("operators")) {
      m.operators.clear();
      for (const auto& op : doc.at("operators")) {
        ErrorOperator e;
        e.label = op.value("label", "custom");
        const auto& mat = op.at("matrix");
        if (!mat.is_array() || mat.size() != 8) {
          throw ErrorModelError(fmt::format("operator '{}' needs 8 reals (re,im of 4 entries)", e.label));
        }
        for (std::size_t k = 0; k < 4; ++k) e.matrix.m[k] = Complex(mat[2 * k].get<double>(), mat[2 * k + 1].get<double>());
        e.weight = op.value("weight", 1.0);
        m.operators.push_back(e);
      }
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ErrorModelError(fmt::format("malformed device document: {}", e.what()));
  }
}

DeviceErrorModel load_device_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open device file '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ErrorModelError(fmt::format("malformed device document '{}': {}", path.string(), e.what()));
  }
  return load_device_model(doc);
}

json to_json(const DeviceErrorModel& model) {
  json doc;
  doc["qubits"] = model.qubit_count();
  doc["edges"] = json::array();
  for (const auto& [a, b] : model.coupling.edges()) doc["edges"].push_back({a, b});
  doc["gate1_error"] = model.gate1_error;
  doc["readout_error"] = model.readout_error;
  json cx = json::object();
  for (const auto& [edge, rate] : model.cx_error) cx[fmt::format("{}-{}", edge.first, edge.second)] = rate;
  doc["cx_error"] = cx;
  json t1 = json::array();
  for (const double t : model.t1_seconds) t1.push_back(std::isfinite(t) ? json(t * 1e6) : json(nullptr));
  doc["t1_us"] = t1;
  return doc;
}

std::vector<ErrorPosition> error_positions(const LayeredCircuit& circuit, const DeviceErrorModel& model) {
  std::vector<ErrorPosition> out;
  for (std::size_t l = 0; l < circuit.layers.size(); ++l) {
    const std::size_t first = out.size();
    for (const LayerOp& lop : circuit.layers[l]) {
      std::visit(
          [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, UGate>) {
              out.push_back({l, op.qubit, lop.source_index, model.gate1_error.at(op.qubit)});
            } else if constexpr (std::is_same_v<T, CXGate>) {
              const double r = model.cx_rate(op.control, op.target);
              out.push_back({l, op.control, lop.source_index, r});
              out.push_back({l, op.target, lop.source_index, r});
            } else if constexpr (std::is_same_v<T, Measure>) {
              out.push_back({l, op.qubit, lop.source_index, model.readout_error.at(op.qubit),
                             ErrorPosition::Kind::kReadout, op.cbit});
            }
          },
          lop.op);
    }
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
              [](const ErrorPosition& a, const ErrorPosition& b) { return a.qubit < b.qubit; });
  }
  return out;
}

std::vector<double> operator_probabilities(double rate, const std::vector<ErrorOperator>& operators) {
  double total = 0.0;
  for (const auto& op : operators) total += op.weight;
  std::vector<double> p;
  p.reserve(operators.size());
  for (const auto& op : operators) p.push_back(rate * op.weight / total);
  return p;
}

Injection sample_injection(const ErrorPosition& position, const std::vector<ErrorOperator>& operators, Rng& rng) {
  const double u = rng.uniform();
  if (u >= position.rate) return Injection::none();
  if (position.kind == ErrorPosition::Kind::kReadout) return Injection::flip();
  // u < rate: split [0, rate) into per-operator slices.
  double total = 0.0;
  for (const auto& op : operators) total += op.weight;
  const double target = u / position.rate * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < operators.size(); ++k) {
    acc += operators[k].weight;
    if (target < acc) return Injection::op(k);
  }
  return Injection::op(operators.size() - 1);
}

}  // namespace nisqsim
