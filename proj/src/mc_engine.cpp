#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "nisqsim/mc_engine.hpp"

namespace nisqsim {

NoisyCircuit make_noisy_circuit(LayeredCircuit circuit) {
  if (circuit.cbit_count > 64) {
    throw UnsupportedProgram(fmt::format("{} classical bits; the noisy engine supports at most 64", circuit.cbit_count));
  }
  NoisyCircuit out;
  std::vector<bool> measured(circuit.qubit_count, false);
  for (const auto& layer : circuit.layers) {
    for (const auto& lop : layer) {
      if (std::holds_alternative<Reset>(lop.op)) {
        throw UnsupportedProgram(
            fmt::format("instruction {}: reset is unsupported in the noisy engine (use cosim)", lop.source_index));
      }
      for (const QubitIndex q : operand_qubits(lop.op)) {
        if (measured[q]) {
          throw UnsupportedProgram(fmt::format(
              "instruction {}: qubit {} is used after being measured; mid-circuit measurement needs cosim",
              lop.source_index, q));
        }
      }
      if (const auto* m = std::get_if<Measure>(&lop.op)) {
        measured[m->qubit] = true;
        out.measurements.push_back({m->qubit, m->cbit, lop.source_index});
      }
    }
  }
  std::sort(out.measurements.begin(), out.measurements.end(),
            [](const MeasurementSlot& a, const MeasurementSlot& b) { return a.source_index < b.source_index; });
  out.layers = std::move(circuit);
  return out;
}

namespace {

// Lexicographic on injections; running out of injections sorts last.
bool trace_before(const ErrorTrace& a, const ErrorTrace& b) {
  const std::size_t n = std::min(a.injections.size(), b.injections.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.injections[i] != b.injections[i]) return a.injections[i] < b.injections[i];
  }
  if (a.injections.size() != b.injections.size()) return a.injections.size() > b.injections.size();
  return a.trial_id < b.trial_id;
}

std::uint64_t read_register(const NoisyCircuit& circuit, std::uint64_t basis, const ErrorTrace& trace) {
  std::uint64_t bits = 0;
  for (const auto& slot : circuit.measurements) {
    std::uint64_t bit = (basis >> slot.qubit) & 1U;
    if (std::find(trace.flipped_measurements.begin(), trace.flipped_measurements.end(), slot.source_index) !=
        trace.flipped_measurements.end()) {
      bit ^= 1U;
    }
    bits = (bits & ~(std::uint64_t{1} << slot.cbit)) | (bit << slot.cbit);
  }
  return bits;
}

void check_traces(const TraceSet& ts) {
  const std::size_t depth = ts.circuit.layers.depth();
  for (const auto& t : ts.traces) {
    for (std::size_t i = 0; i < t.injections.size(); ++i) {
      const auto& inj = t.injections[i];
      if (inj.layer >= depth) {
        throw std::out_of_range(fmt::format("trace {} injects at layer {} beyond circuit depth {}", t.trial_id,
                                            inj.layer, depth));
      }
      if (inj.qubit >= ts.circuit.layers.qubit_count) {
        throw std::out_of_range(fmt::format("trace {} injects on unknown qubit {}", t.trial_id, inj.qubit));
      }
      if (inj.op >= ts.operators.size()) {
        throw std::out_of_range(fmt::format("trace {} references unknown operator {}", t.trial_id, inj.op));
      }
      if (i > 0 && !(t.injections[i - 1] < inj &&
                     std::pair(t.injections[i - 1].layer, t.injections[i - 1].qubit) != std::pair(inj.layer, inj.qubit))) {
        throw std::invalid_argument(fmt::format("trace {} injections are unsorted or repeat a slot", t.trial_id));
      }
    }
  }
}

/// Shared pieces of every engine: layer application, injections, readout.
class Simulator {
 public:
  explicit Simulator(const TraceSet& ts) : ts_(ts), cx_(cx_matrix()) {
    const auto& layers = ts.circuit.layers.layers;
    gates_.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (const auto& lop : layers[l]) {
        if (const auto* u = std::get_if<UGate>(&lop.op)) {
          gates_[l].push_back({u_matrix(*u), u->qubit, 0, false});
        } else if (const auto* cx = std::get_if<CXGate>(&lop.op)) {
          gates_[l].push_back({{}, cx->control, cx->target, true});
        }
      }
    }
  }

  std::size_t depth() const { return gates_.size(); }
  StateVector initial() const { return StateVector(ts_.circuit.layers.qubit_count); }

  void apply_layer(StateVector& s, std::size_t layer) {
    for (const auto& g : gates_[layer]) {
      if (g.two_qubit) {
        apply_2q(s, cx_, g.q1, g.q2, counter_);
      } else {
        apply_1q(s, g.matrix, g.q1, counter_);
      }
    }
  }

  void apply_injection(StateVector& s, const TraceInjection& inj) {
    apply_1q(s, ts_.operators[inj.op].matrix, inj.qubit, counter_);
  }

  std::uint64_t sample(std::span<const double> cdf, const ErrorTrace& trace) const {
    Rng rng = Rng::stream(ts_.seed, trace.trial_id, Rng::Domain::kMeasure);
    return read_register(ts_.circuit, sample_index(cdf, rng), trace);
  }

  void record(RunResult& result, const ErrorTrace& trace, std::uint64_t bits) const {
    result.distribution.add(bits);
    result.outcome_by_trial[trace.trial_id] = bits;
  }

  std::uint64_t matvecs() const { return counter_.count; }

 private:
  struct Gate {
    Mat2 matrix;
    QubitIndex q1;
    QubitIndex q2;
    bool two_qubit;
  };

  const TraceSet& ts_;
  Mat4 cx_;
  std::vector<std::vector<Gate>> gates_;
  MatvecCounter counter_;
};

RunResult empty_result(const TraceSet& ts) {
  RunResult r;
  r.distribution.cbit_count = ts.circuit.layers.cbit_count;
  r.metrics.trials = ts.traces.size();
  return r;
}

/// Depth-first walk over the sorted traces. A range of traces that shares
/// `depth` injections owns one state; each group branching off it gets a
/// copy while the state stays stored, and the last consumer takes it over.
class ReorderedRunner {
 public:
  ReorderedRunner(const TraceSet& ts, RunResult& result) : ts_(ts), sim_(ts), result_(result) {
    order_.reserve(ts.traces.size());
    for (const auto& t : ts.traces) order_.push_back(&t);
    // The engine walks sorted ranges; tolerate callers that edited the order.
    if (!std::is_sorted(order_.begin(), order_.end(),
                        [](const ErrorTrace* a, const ErrorTrace* b) { return trace_before(*a, *b); })) {
      std::sort(order_.begin(), order_.end(),
                [](const ErrorTrace* a, const ErrorTrace* b) { return trace_before(*a, *b); });
    }
  }

  void run() {
    if (!order_.empty()) walk(sim_.initial(), 0, order_.size(), 0, 0, false);
    result_.metrics.matvec_count = sim_.matvecs();
    result_.metrics.msv_peak = peak_;
  }

 private:
  bool has(std::size_t i, std::size_t depth) const { return depth < order_[i]->injections.size(); }
  const TraceInjection& inj(std::size_t i, std::size_t depth) const { return order_[i]->injections[depth]; }

  void walk(StateVector state, std::size_t begin, std::size_t end, std::size_t depth, std::size_t layer,
            bool layer_applied) {
    std::size_t i = begin;
    while (true) {
      if (!layer_applied) {
        if (layer >= sim_.depth()) break;
        sim_.apply_layer(state, layer);
        layer_applied = true;
      }
      while (i < end && has(i, depth) && inj(i, depth).layer == layer) {
        std::size_t j = i + 1;
        while (j < end && has(j, depth) && inj(j, depth) == inj(i, depth)) ++j;
        const TraceInjection first = inj(i, depth);
        if (j == end) {
          sim_.apply_injection(state, first);
          walk(std::move(state), i, j, depth + 1, layer, true);
          return;
        }
        StateVector branch = state;
        ++stored_;
        peak_ = std::max(peak_, stored_);
        sim_.apply_injection(branch, first);
        walk(std::move(branch), i, j, depth + 1, layer, true);
        --stored_;
        i = j;
      }
      if (i == end) return;
      ++layer;
      layer_applied = false;
    }
    const auto cdf = cumulative_distribution(state);
    for (; i < end; ++i) sim_.record(result_, *order_[i], sim_.sample(cdf, *order_[i]));
  }

  const TraceSet& ts_;
  Simulator sim_;
  RunResult& result_;
  std::vector<const ErrorTrace*> order_;
  std::size_t stored_ = 0;
  std::size_t peak_ = 0;
};

/// Executes traces in trial-id order. A state is cached at every point some
/// later trace resumes from, and released after that trace's last user.
class TrialOrderRunner {
 public:
  TrialOrderRunner(const TraceSet& ts, RunResult& result) : ts_(ts), sim_(ts), result_(result) {
    for (const auto& t : ts.traces) order_.push_back(&t);
    std::sort(order_.begin(), order_.end(),
              [](const ErrorTrace* a, const ErrorTrace* b) { return a->trial_id < b->trial_id; });
  }

  void run() {
    plan();
    for (std::size_t p = 0; p < order_.size(); ++p) execute(p);
    result_.metrics.matvec_count = sim_.matvecs();
    result_.metrics.msv_peak = peak_;
  }

 private:
  // A point is the state of trie node `node`'s error-free continuation once
  // the gates of `layer` have been applied.
  using Point = std::pair<std::size_t, std::size_t>;
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Node {
    std::map<TraceInjection, std::size_t> children;
    std::size_t max_next = 0;
  };

  struct Start {
    bool initial = true;
    Point point{};
    std::size_t consumed = 0;
  };

  std::size_t last_layer() const { return sim_.depth() - 1; }

  std::size_t next_layer(const ErrorTrace& t, std::size_t i) const {
    return i < t.injections.size() ? t.injections[i].layer : last_layer();
  }

  void plan() {
    nodes_.assign(1, Node{});
    starts_.resize(order_.size());
    if (sim_.depth() == 0) return;
    for (std::size_t p = 0; p < order_.size(); ++p) {
      const ErrorTrace& t = *order_[p];
      if (p > 0) {
        std::size_t node = 0;
        std::size_t i = 0;
        while (i < t.injections.size()) {
          const auto it = nodes_[node].children.find(t.injections[i]);
          if (it == nodes_[node].children.end()) break;
          node = it->second;
          ++i;
        }
        const Point start{node, std::min(nodes_[node].max_next, next_layer(t, i))};
        starts_[p] = Start{false, start, i};
        last_use_[start] = p;
      }
      std::size_t node = 0;
      for (std::size_t i = 0; i <= t.injections.size(); ++i) {
        nodes_[node].max_next = std::max(nodes_[node].max_next, next_layer(t, i));
        if (i == t.injections.size()) break;
        auto [it, inserted] = nodes_[node].children.try_emplace(t.injections[i], nodes_.size());
        const std::size_t child = it->second;
        if (inserted) nodes_.emplace_back();
        node = child;
      }
    }
  }

  void maybe_store(const Point& point, std::size_t p, const StateVector& state) {
    const auto it = last_use_.find(point);
    if (it == last_use_.end() || it->second <= p || cache_.count(point) != 0) return;
    cache_.emplace(point, state);
    peak_ = std::max(peak_, cache_.size());
  }

  void execute(std::size_t p) {
    const ErrorTrace& t = *order_[p];
    if (sim_.depth() == 0) {
      const auto cdf = cumulative_distribution(sim_.initial());
      sim_.record(result_, t, sim_.sample(cdf, t));
      return;
    }
    const Start& start = starts_[p];
    std::size_t node = 0;
    std::size_t layer = 0;
    std::size_t consumed = 0;
    StateVector state = sim_.initial();
    if (start.initial) {
      sim_.apply_layer(state, 0);
    } else {
      const auto it = cache_.find(start.point);
      if (it == cache_.end()) throw std::logic_error("trial-order engine lost a checkpoint");
      if (last_use_.at(start.point) == p) {
        state = std::move(it->second);
        cache_.erase(it);
      } else {
        state = it->second;
      }
      std::tie(node, layer) = start.point;
      consumed = start.consumed;
    }
    while (true) {
      maybe_store({node, layer}, p, state);
      if (consumed < t.injections.size() && t.injections[consumed].layer == layer) {
        sim_.apply_injection(state, t.injections[consumed]);
        node = nodes_[node].children.at(t.injections[consumed]);
        ++consumed;
      } else if (layer < last_layer()) {
        ++layer;
        sim_.apply_layer(state, layer);
      } else {
        break;
      }
    }
    const auto cdf = cumulative_distribution(state);
    sim_.record(result_, t, sim_.sample(cdf, t));
  }

  const TraceSet& ts_;
  Simulator sim_;
  RunResult& result_;
  std::vector<const ErrorTrace*> order_;
  std::vector<Node> nodes_;
  std::vector<Start> starts_;
  std::map<Point, std::size_t> last_use_;
  std::map<Point, StateVector> cache_;
  std::size_t peak_ = 0;
};

}  // namespace

void order_traces(std::vector<ErrorTrace>& traces) { std::sort(traces.begin(), traces.end(), trace_before); }

TraceSet generate_traces(const NoisyCircuit& circuit, const DeviceErrorModel& model, std::uint64_t trials,
                         std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("generate_traces: trials must be at least 1");
  const auto positions = error_positions(circuit.layers, model);
  TraceSet ts;
  ts.circuit = circuit;
  ts.operators = model.operators;
  ts.seed = seed;
  ts.traces.resize(trials);
  for (std::uint64_t i = 0; i < trials; ++i) {
    ErrorTrace& t = ts.traces[i];
    t.trial_id = i;
    Rng rng = Rng::stream(seed, i, Rng::Domain::kTrace);
    for (const auto& pos : positions) {
      const Injection inj = sample_injection(pos, model.operators, rng);
      if (inj.kind == Injection::Kind::kOperator) {
        t.injections.push_back({pos.layer, pos.qubit, inj.operator_index});
      } else if (inj.kind == Injection::Kind::kFlip) {
        t.flipped_measurements.push_back(pos.source_index);
      }
    }
  }
  order_traces(ts.traces);
  return ts;
}

double OutputDistribution::probability(std::uint64_t value) const {
  if (trials == 0) return 0.0;
  const auto it = counts.find(value);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(trials);
}

std::vector<double> OutputDistribution::probabilities() const {
  if (cbit_count > 24) throw std::length_error("dense distribution limited to 24 classical bits");
  std::vector<double> out(std::size_t{1} << cbit_count, 0.0);
  for (const auto& [value, count] : counts) out.at(value) = static_cast<double>(count) / static_cast<double>(trials);
  return out;
}

RunResult run_optimized(const TraceSet& traces, ExecutionOrder order) {
  check_traces(traces);
  RunResult result = empty_result(traces);
  if (order == ExecutionOrder::kReordered) {
    ReorderedRunner(traces, result).run();
  } else {
    TrialOrderRunner(traces, result).run();
  }
  return result;
}

RunResult run_bruteforce(const TraceSet& traces) {
  check_traces(traces);
  RunResult result = empty_result(traces);
  Simulator sim(traces);
  for (const auto& t : traces.traces) {
    StateVector state = sim.initial();
    std::size_t next = 0;
    for (std::size_t l = 0; l < sim.depth(); ++l) {
      sim.apply_layer(state, l);
      for (; next < t.injections.size() && t.injections[next].layer == l; ++next) {
        sim.apply_injection(state, t.injections[next]);
      }
    }
    const auto cdf = cumulative_distribution(state);
    sim.record(result, t, sim.sample(cdf, t));
  }
  result.metrics.matvec_count = sim.matvecs();
  result.metrics.msv_peak = traces.traces.empty() ? 0 : 1;
  return result;
}

double fidelity(const OutputDistribution& observed, std::uint64_t reference) {
  if (reference >> observed.cbit_count != 0 && observed.cbit_count < 64) {
    throw std::invalid_argument(
        fmt::format("reference value {} does not fit {} classical bits", reference, observed.cbit_count));
  }
  return observed.probability(reference);
}

DistributionComparison compare_to_reference(const OutputDistribution& observed, std::span<const double> reference) {
  if (observed.cbit_count > 24 || reference.size() != (std::size_t{1} << observed.cbit_count)) {
    throw std::invalid_argument(fmt::format("reference has {} entries; expected 2^{}", reference.size(),
                                            observed.cbit_count));
  }
  const auto p = observed.probabilities();
  DistributionComparison out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (reference[i] > 0.0) out.support_mass += p[i];
    out.total_variation += std::abs(p[i] - reference[i]);
  }
  out.total_variation *= 0.5;
  return out;
}

double error_free_fraction(const TraceSet& traces) {
  if (traces.traces.empty()) return 0.0;
  const auto clean = std::count_if(traces.traces.begin(), traces.traces.end(),
                                   [](const ErrorTrace& t) { return t.error_free(); });
  return static_cast<double>(clean) / static_cast<double>(traces.traces.size());
}

namespace {

// Final register distribution of one deterministic error assignment.
void accumulate_register(const NoisyCircuit& circuit, const StateVector& state, double weight,
                         std::vector<double>& out) {
  const ErrorTrace no_flips;
  for (std::size_t b = 0; b < state.size(); ++b) {
    const double p = std::norm(state[b]);
    if (p != 0.0) out[read_register(circuit, b, no_flips)] += weight * p;
  }
}

void fold_readout_flips(const NoisyCircuit& circuit, const DeviceErrorModel& model, std::vector<double>& dist) {
  for (std::size_t k = 0; k < circuit.measurements.size(); ++k) {
    const auto& slot = circuit.measurements[k];
    const bool overwritten = std::any_of(circuit.measurements.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                                         circuit.measurements.end(),
                                         [&](const MeasurementSlot& s) { return s.cbit == slot.cbit; });
    const double r = model.readout_error.at(slot.qubit);
    if (overwritten || r == 0.0) continue;
    const std::uint64_t mask = std::uint64_t{1} << slot.cbit;
    std::vector<double> next(dist.size());
    for (std::size_t v = 0; v < dist.size(); ++v) next[v] = (1.0 - r) * dist[v] + r * dist[v ^ mask];
    dist = std::move(next);
  }
}

}  // namespace

std::vector<double> noiseless_distribution(const NoisyCircuit& circuit) {
  DeviceErrorModel quiet = DeviceErrorModel::uniform(circuit.layers.qubit_count, 0.0);
  return exact_noisy_oracle(circuit, quiet);
}

std::vector<double> exact_noisy_oracle(const NoisyCircuit& circuit, const DeviceErrorModel& model) {
  if (circuit.layers.cbit_count > 24) throw std::length_error("oracle limited to 24 classical bits");
  std::vector<ErrorPosition> active;
  for (const auto& pos : error_positions(circuit.layers, model)) {
    if (pos.kind == ErrorPosition::Kind::kQuantum && pos.rate > 0.0) active.push_back(pos);
  }
  if (active.size() > kMaxOraclePositions) {
    throw std::length_error(fmt::format("{} error positions exceed the oracle limit of {}", active.size(),
                                        kMaxOraclePositions));
  }
  const std::size_t choices = model.operators.size() + 1;  // 0 = no error
  std::vector<std::vector<double>> probs;
  for (const auto& pos : active) {
    std::vector<double> p{1.0 - pos.rate};
    for (const double q : operator_probabilities(pos.rate, model.operators)) p.push_back(q);
    probs.push_back(std::move(p));
  }
  const Mat4 cx = cx_matrix();
  std::vector<double> dist(std::size_t{1} << circuit.layers.cbit_count, 0.0);
  std::vector<std::size_t> pick(active.size(), 0);
  while (true) {
    double weight = 1.0;
    for (std::size_t k = 0; k < active.size(); ++k) weight *= probs[k][pick[k]];
    if (weight > 0.0) {
      StateVector state(circuit.layers.qubit_count);
      std::size_t k = 0;
      for (std::size_t l = 0; l < circuit.layers.layers.size(); ++l) {
        for (const auto& lop : circuit.layers.layers[l]) {
          if (const auto* u = std::get_if<UGate>(&lop.op)) {
            apply_1q(state, u_matrix(*u), u->qubit);
          } else if (const auto* g = std::get_if<CXGate>(&lop.op)) {
            apply_2q(state, cx, g->control, g->target);
          }
        }
        for (; k < active.size() && active[k].layer == l; ++k) {
          if (pick[k] != 0) apply_1q(state, model.operators[pick[k] - 1].matrix, active[k].qubit);
        }
      }
      accumulate_register(circuit, state, weight, dist);
    }
    std::size_t k = 0;
    while (k < pick.size() && ++pick[k] == choices) pick[k++] = 0;
    if (k == pick.size()) break;
  }
  fold_readout_flips(circuit, model, dist);
  return dist;
}

EngineComparison compare_engines(const TraceSet& traces) {
  EngineComparison out;
  out.optimized = run_optimized(traces, ExecutionOrder::kReordered);
  out.bruteforce = run_bruteforce(traces);
  const RunResult trial_order = run_optimized(traces, ExecutionOrder::kTrialOrder);
  out.trial_order = trial_order.metrics;
  out.outcomes_identical = out.optimized.outcome_by_trial == out.bruteforce.outcome_by_trial &&
                           trial_order.outcome_by_trial == out.bruteforce.outcome_by_trial;
  return out;
}

}  // namespace nisqsim
