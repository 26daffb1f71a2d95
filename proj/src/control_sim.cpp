#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "nisqsim/control_sim.hpp"

namespace nisqsim {

using nlohmann::json;

namespace {

Picoseconds ns_to_ps(double ns) { return static_cast<Picoseconds>(std::llround(ns * 1000.0)); }

Picoseconds round_up(Picoseconds t, Picoseconds period) { return (t + period - 1) / period * period; }

}  // namespace

Picoseconds ControlConfig::period() const { return static_cast<Picoseconds>(std::llround(1e12 / clock_hz)); }

Picoseconds ControlConfig::cycles_to_ps(double ns) const { return round_up(ns_to_ps(ns), period()); }

Picoseconds ControlConfig::startup_offset() const { return ns_to_ps(startup_offset_ns); }

Picoseconds ControlConfig::reset_hold(QubitIndex qubit) const {
  const double t1 = qubit < t1_seconds.size() ? t1_seconds[qubit] : kDefaultT1Seconds;
  if (!std::isfinite(t1)) throw ControlConfigError(fmt::format("reset on qubit {} needs a finite T1", qubit));
  return cycles_to_ps(5.0 * t1 * 1e9);
}

void ControlConfig::validate() const {
  if (!(clock_hz > 0.0) || !std::isfinite(clock_hz) || period() <= 0) {
    throw ControlConfigError(fmt::format("clock_hz must be positive, got {}", clock_hz));
  }
  for (const auto& [label, ns] : {std::pair{"lat_1q_ns", lat_1q_ns}, std::pair{"lat_2q_ns", lat_2q_ns},
                                  std::pair{"lat_meas_ns", lat_meas_ns}}) {
    if (!(ns >= 0.0) || !std::isfinite(ns)) throw ControlConfigError(fmt::format("{} must be non-negative", label));
  }
  if (!(startup_offset_ns >= 0.0) || !std::isfinite(startup_offset_ns)) {
    throw ControlConfigError("startup_offset_ns must be non-negative");
  }
  for (const double t : t1_seconds) {
    if (!(t > 0.0)) throw ControlConfigError("t1 values must be positive");
  }
  if (da_channels) {
    const std::size_t need = std::max({chan_1q, chan_2q, meas_da});
    if (*da_channels < need) {
      throw ControlConfigError(
          fmt::format("{} DA channels cannot serve an op needing {} (chan_1q={}, chan_2q={}, meas_da={})",
                      *da_channels, need, chan_1q, chan_2q, meas_da));
    }
  }
  if (ad_channels && *ad_channels < meas_ad) {
    throw ControlConfigError(fmt::format("{} AD channels cannot serve a measurement needing {}", *ad_channels, meas_ad));
  }
}

ControlConfig ControlConfig::preset(const std::string& name) {
  ControlConfig c;
  if (name == "qcb-baseline") return c;
  if (name == "ibm-experimental") {
    c.name = name;
    c.lat_1q_ns = 50.0;
    c.lat_2q_ns = 300.0;
    c.da_channels = 2;
    c.ad_channels = 2;
    c.chan_2q = 2;
    return c;
  }
  throw ControlConfigError(fmt::format("unknown control preset '{}' (known: qcb-baseline, ibm-experimental)", name));
}

namespace {

std::optional<std::size_t> channel_count(const json& v, const char* key) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinite") return std::nullopt;
    throw ControlConfigError(fmt::format("'{}' must be a count or \"inf\", got '{}'", key, s));
  }
  if (!v.is_number_unsigned()) throw ControlConfigError(fmt::format("'{}' must be a count or \"inf\"", key));
  return v.get<std::size_t>();
}

}  // namespace

ControlConfig load_control_config(const json& doc) {
  if (!doc.is_object()) throw ControlConfigError("control document must be an object");
  try {
    ControlConfig c = ControlConfig::preset(doc.value("preset", "qcb-baseline"));
    c.name = doc.value("name", doc.value("preset", c.name));
    c.clock_hz = doc.value("clock_hz", c.clock_hz);
    c.lat_1q_ns = doc.value("lat_1q_ns", c.lat_1q_ns);
    c.lat_2q_ns = doc.value("lat_2q_ns", c.lat_2q_ns);
    c.lat_meas_ns = doc.value("lat_meas_ns", c.lat_meas_ns);
    c.chan_1q = doc.value("chan_1q", c.chan_1q);
    c.chan_2q = doc.value("chan_2q", c.chan_2q);
    c.meas_da = doc.value("meas_da", c.meas_da);
    c.meas_ad = doc.value("meas_ad", c.meas_ad);
    if (doc.contains("da_channels")) c.da_channels = channel_count(doc.at("da_channels"), "da_channels");
    if (doc.contains("ad_channels")) c.ad_channels = channel_count(doc.at("ad_channels"), "ad_channels");
    if (doc.contains("t1_us")) {
      c.t1_seconds.clear();
      for (const auto& t : doc.at("t1_us")) {
        c.t1_seconds.push_back(t.is_null() ? std::numeric_limits<double>::infinity() : t.get<double>() * 1e-6);
      }
    }
    c.startup_offset_ns = doc.value("startup_offset_ns", c.startup_offset_ns);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ControlConfigError(fmt::format("malformed control document: {}", e.what()));
  }
}

ControlConfig load_control_config(const std::string& preset_or_path) {
  if (preset_or_path == "qcb-baseline" || preset_or_path == "ibm-experimental") {
    return ControlConfig::preset(preset_or_path);
  }
  std::ifstream in(preset_or_path);
  if (!in) throw std::runtime_error(fmt::format("cannot open control config '{}'", preset_or_path));
  try {
    return load_control_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ControlConfigError(fmt::format("malformed control document '{}': {}", preset_or_path, e.what()));
  }
}

json to_json(const ControlConfig& c) {
  auto count = [](const std::optional<std::size_t>& n) { return n ? json(*n) : json("inf"); };
  json t1 = json::array();
  for (const double t : c.t1_seconds) t1.push_back(std::isfinite(t) ? json(t * 1e6) : json(nullptr));
  return {{"name", c.name},           {"clock_hz", c.clock_hz},
          {"lat_1q_ns", c.lat_1q_ns}, {"lat_2q_ns", c.lat_2q_ns},
          {"lat_meas_ns", c.lat_meas_ns}, {"chan_1q", c.chan_1q},
          {"chan_2q", c.chan_2q},     {"da_channels", count(c.da_channels)},
          {"ad_channels", count(c.ad_channels)}, {"meas_da", c.meas_da},
          {"meas_ad", c.meas_ad},     {"t1_us", t1},
          {"startup_offset_ns", c.startup_offset_ns}};
}

std::uint64_t ExecutionStats::register_value() const {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < registers.size() && i < 64; ++i) {
    if (registers[i] != 0) v |= std::uint64_t{1} << i;
  }
  return v;
}

namespace {

class ChannelPool {
 public:
  ChannelPool(std::optional<std::size_t> count, std::vector<ChannelUsage>& usage)
      : unlimited_(!count), usage_(usage) {
    free_at_.assign(count.value_or(0), 0);
    usage_.assign(free_at_.size(), {});
  }

  /// Channels that free up earliest, lowest index on ties.
  std::vector<std::size_t> pick(std::size_t k, Picoseconds ready) {
    std::vector<std::size_t> order(free_at_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return free_at_[a] < free_at_[b]; });
    std::vector<std::size_t> chosen;
    for (const std::size_t c : order) {
      if (chosen.size() == k) break;
      if (unlimited_ && free_at_[c] > ready) break;
      chosen.push_back(c);
    }
    while (chosen.size() < k) {
      chosen.push_back(free_at_.size());
      free_at_.push_back(0);
      usage_.emplace_back();
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  Picoseconds free_at(const std::vector<std::size_t>& chosen) const {
    Picoseconds t = 0;
    for (const std::size_t c : chosen) t = std::max(t, free_at_[c]);
    return t;
  }

  void hold(const std::vector<std::size_t>& chosen, Picoseconds start, Picoseconds end) {
    for (const std::size_t c : chosen) {
      free_at_[c] = end;
      if (end > start) {
        usage_[c].busy += end - start;
        usage_[c].intervals.push_back({start, end});
      }
    }
  }

 private:
  bool unlimited_;
  std::vector<Picoseconds> free_at_;
  std::vector<ChannelUsage>& usage_;
};

class Machine {
 public:
  Machine(const Program& program, const ControlConfig& config, OutcomeSource& outcomes)
      : program_(program),
        config_(config),
        outcomes_(outcomes),
        qubit_free_(program.qubit_count, 0),
        written_at_(program.cbit_count, -1),
        da_(config.da_channels, stats_.da),
        ad_(config.ad_channels, stats_.ad) {
    stats_.da_unlimited = !config.da_channels;
    stats_.ad_unlimited = !config.ad_channels;
    stats_.startup_offset = config.startup_offset();
    stats_.registers.assign(program.cbit_count, 0);
  }

  ExecutionStats run() {
    for (std::size_t i = 0; i < program_.instructions.size(); ++i) step(i, program_.instructions[i]);
    stats_.total_time = stats_.startup_offset + last_end_;
    return std::move(stats_);
  }

 private:
  void step(std::size_t index, const Instruction& instr) {
    InstructionRecord rec;
    rec.index = index;
    if (const auto* cond = std::get_if<IfBit>(&instr)) {
      rec.conditional = true;
      rec.mnemonic = mnemonic(to_instruction(cond->inner));
      rec.qubits = operand_qubits(instr);
      if (written_at_[cond->cbit] < 0) {
        stats_.warnings.push_back(
            fmt::format("instruction {}: c[{}] is read before any measurement wrote it; reading 0", index, cond->cbit));
      } else {
        now_ = std::max(now_, written_at_[cond->cbit]);
      }
      rec.dispatch = now_;
      if (stats_.registers[cond->cbit] != cond->value) {
        rec.executed = false;
        rec.start = rec.end = now_;
        stats_.records.push_back(std::move(rec));
        return;
      }
      ++stats_.conditionals_fired;
      execute(index, to_instruction(cond->inner), rec);
    } else {
      rec.mnemonic = mnemonic(instr);
      rec.qubits = operand_qubits(instr);
      rec.dispatch = now_;
      execute(index, instr, rec);
    }
    last_end_ = std::max(last_end_, rec.end);
    stats_.records.push_back(std::move(rec));
  }

  Picoseconds qubits_ready(const std::vector<QubitIndex>& qubits) const {
    Picoseconds t = now_;
    for (const QubitIndex q : qubits) t = std::max(t, qubit_free_[q]);
    return t;
  }

  void occupy(InstructionRecord& rec, std::size_t da, std::size_t ad, Picoseconds latency) {
    const Picoseconds ready = qubits_ready(rec.qubits);
    rec.da = da_.pick(da, ready);
    rec.ad = ad_.pick(ad, ready);
    rec.start = std::max({ready, da_.free_at(rec.da), ad_.free_at(rec.ad)});
    rec.end = rec.start + latency;
    da_.hold(rec.da, rec.start, rec.end);
    ad_.hold(rec.ad, rec.start, rec.end);
    for (const QubitIndex q : rec.qubits) qubit_free_[q] = rec.end;
  }

  void execute(std::size_t index, const Instruction& instr, InstructionRecord& rec) {
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, UGate>) {
            occupy(rec, config_.chan_1q, 0, config_.lat_1q());
            outcomes_.on_operation(op);
          } else if constexpr (std::is_same_v<T, CXGate>) {
            occupy(rec, config_.chan_2q, 0, config_.lat_2q());
            outcomes_.on_operation(op);
          } else if constexpr (std::is_same_v<T, Measure>) {
            occupy(rec, config_.meas_da, config_.meas_ad, config_.lat_meas());
            const int bit = outcomes_.next_outcome({index, op.qubit, op.cbit, rec.start, rec.end});
            stats_.registers[op.cbit] = bit != 0 ? 1 : 0;
            written_at_[op.cbit] = rec.end;
          } else if constexpr (std::is_same_v<T, Reset>) {
            rec.start = qubits_ready(rec.qubits);
            rec.end = rec.start + config_.reset_hold(op.qubit);
            qubit_free_[op.qubit] = rec.end;
            outcomes_.on_operation(op);
          } else if constexpr (std::is_same_v<T, Wait>) {
            rec.start = now_;
            rec.end = now_ + static_cast<Picoseconds>(op.cycles) * config_.period();
            now_ = rec.end;
          }
        },
        instr);
  }

  const Program& program_;
  const ControlConfig& config_;
  OutcomeSource& outcomes_;
  ExecutionStats stats_;
  std::vector<Picoseconds> qubit_free_;
  std::vector<Picoseconds> written_at_;
  ChannelPool da_;
  ChannelPool ad_;
  Picoseconds now_ = 0;
  Picoseconds last_end_ = 0;
};

Picoseconds overlap(const Interval& a, const Interval& b) {
  return std::max<Picoseconds>(0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

double channel_utilization(const std::vector<ChannelUsage>& channels, const Interval& window) {
  const Picoseconds width = window.end - window.start;
  if (channels.empty() || width <= 0) return 0.0;
  Picoseconds busy = 0;
  for (const auto& ch : channels) {
    for (const auto& iv : ch.intervals) busy += overlap(iv, window);
  }
  return static_cast<double>(busy) / (static_cast<double>(channels.size()) * static_cast<double>(width));
}

bool is_active(const InstructionRecord& rec) { return rec.executed && rec.mnemonic != "Wait" && rec.end > rec.start; }

}  // namespace

ExecutionStats simulate(const Program& program, const ControlConfig& config, OutcomeSource& outcomes) {
  validate_program(program);
  config.validate();
  return Machine(program, config, outcomes).run();
}

std::vector<UtilizationRow> utilization_report(const ExecutionStats& stats, const std::vector<Interval>& windows) {
  std::vector<UtilizationRow> rows;
  for (const auto& w : windows) {
    if (w.end < w.start) throw std::invalid_argument(fmt::format("window [{}, {}) is reversed", w.start, w.end));
    UtilizationRow row;
    row.window = w;
    row.da_utilization = channel_utilization(stats.da, w);
    row.ad_utilization = channel_utilization(stats.ad, w);
    // Peak concurrency changes only at instruction starts inside the window.
    std::vector<Picoseconds> probes{w.start};
    for (const auto& rec : stats.records) {
      if (is_active(rec) && rec.start > w.start && rec.start < w.end) probes.push_back(rec.start);
    }
    for (const Picoseconds t : probes) {
      const auto n = std::count_if(stats.records.begin(), stats.records.end(), [&](const InstructionRecord& rec) {
        return is_active(rec) && rec.start <= t && t < rec.end && t < w.end;
      });
      row.active_peak = std::max(row.active_peak, static_cast<std::size_t>(n));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<UtilizationRow> utilization_report(const ExecutionStats& stats, Picoseconds window) {
  if (window <= 0) throw std::invalid_argument("utilization window must be positive");
  std::vector<Interval> windows;
  for (Picoseconds t = 0; t < stats.total_time; t += window) windows.push_back({t, std::min(t + window, stats.total_time)});
  return utilization_report(stats, windows);
}

std::vector<TimelineSegment> timeline(const ExecutionStats& stats) {
  std::vector<Picoseconds> cuts{0, stats.total_time};
  for (const auto& rec : stats.records) {
    cuts.insert(cuts.end(), {rec.dispatch, rec.start, rec.end});
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<TimelineSegment> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    TimelineSegment seg;
    seg.interval = {cuts[i], cuts[i + 1]};
    const Picoseconds t = cuts[i];
    for (const auto& rec : stats.records) {
      if (!is_active(rec)) continue;
      if (rec.start <= t && t < rec.end) {
        ++seg.active;
        seg.da_busy += rec.da.size();
        seg.ad_busy += rec.ad.size();
      } else if (rec.dispatch <= t && t < rec.start) {
        ++seg.queued;
      }
    }
    if (!out.empty() && out.back().active == seg.active && out.back().queued == seg.queued &&
        out.back().da_busy == seg.da_busy && out.back().ad_busy == seg.ad_busy) {
      out.back().interval.end = seg.interval.end;
    } else {
      out.push_back(seg);
    }
  }
  return out;
}

std::string timeline_csv(const ExecutionStats& stats) {
  std::string out = "start_ns,end_ns,active,queued,da_busy,ad_busy\n";
  for (const auto& seg : timeline(stats)) {
    out += fmt::format("{},{},{},{},{},{}\n", to_ns(seg.interval.start), to_ns(seg.interval.end), seg.active,
                       seg.queued, seg.da_busy, seg.ad_busy);
  }
  return out;
}

Program strip_measurements(const Program& program) {
  Program out = program;
  std::erase_if(out.instructions, [](const Instruction& instr) {
    if (std::holds_alternative<Measure>(instr)) return true;
    const auto* cond = std::get_if<IfBit>(&instr);
    return cond != nullptr && std::holds_alternative<Measure>(cond->inner);
  });
  return out;
}

std::vector<SweepPoint> channel_sweep(const Program& program, const ControlConfig& config,
                                      const std::vector<std::optional<std::size_t>>& da_counts,
                                      const OutcomeSourceFactory& outcomes) {
  const auto make_source = [&]() -> std::unique_ptr<OutcomeSource> {
    return outcomes ? outcomes() : std::make_unique<ConstantOutcome>(0);
  };
  const Program stripped = strip_measurements(program);
  std::vector<SweepPoint> points;
  for (const auto& count : da_counts) {
    ControlConfig c = config;
    c.da_channels = count;
    SweepPoint pt;
    pt.da_channels = count;
    pt.with_measure = simulate(program, c, *make_source()).total_time;
    pt.without_measure = simulate(stripped, c, *make_source()).total_time;
    points.push_back(pt);
  }
  return points;
}

std::optional<std::size_t> saturation_point(const std::vector<SweepPoint>& points) {
  const auto unlimited =
      std::find_if(points.begin(), points.end(), [](const SweepPoint& p) { return !p.da_channels.has_value(); });
  if (unlimited == points.end()) return std::nullopt;
  std::optional<std::size_t> best;
  for (const auto& p : points) {
    if (p.da_channels && p.with_measure == unlimited->with_measure && (!best || *p.da_channels < *best)) {
      best = p.da_channels;
    }
  }
  return best;
}

}  // namespace nisqsim
