#include <algorithm>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nisqsim/cli.hpp"
#include "nisqsim/cosim.hpp"
#include "nisqsim/qasm.hpp"

namespace nisqsim {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json channel_json(const std::optional<std::size_t>& n) { return n ? json(*n) : json("inf"); }

std::string bitstring(std::uint64_t value, std::size_t width) {
  std::string s;
  for (std::size_t i = width; i-- > 0;) s += ((value >> i) & 1U) != 0 ? '1' : '0';
  return s.empty() ? "-" : s;
}

const std::string& single_program(const ExperimentSpec& spec) {
  if (spec.programs.size() != 1) {
    throw UsageError(fmt::format("{} takes exactly one --program ({} given)", spec.command, spec.programs.size()));
  }
  return spec.programs.front();
}

DeviceErrorModel require_device(const ExperimentSpec& spec) {
  if (spec.device.empty()) throw UsageError(fmt::format("{} needs --device", spec.command));
  return load_device_model_file(spec.device);
}

ControlConfig control_for(const ExperimentSpec& spec) {
  ControlConfig config = load_control_config(spec.control);
  if (config.t1_seconds.empty() && !spec.device.empty()) {
    config.t1_seconds = load_device_model_file(spec.device).t1_seconds;
  }
  return config;
}

NoisyCircuit noisy_circuit(const Program& program, const DeviceErrorModel& model) {
  const auto violations = validate_against_device(program, model.coupling);
  if (!violations.empty()) {
    std::string msg = fmt::format("'{}' does not fit the device:", program.source_name);
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw ErrorModelError(msg);
  }
  return make_noisy_circuit(build_layers(program));
}

Table distribution_table(const OutputDistribution& dist, const std::vector<double>* ideal) {
  Table t{"distribution", {"outcome", "count", "probability"}, {}};
  if (ideal != nullptr) t.columns.push_back("ideal");
  std::map<std::uint64_t, std::uint64_t> rows = dist.counts;
  if (ideal != nullptr) {
    for (std::size_t v = 0; v < ideal->size(); ++v) {
      if ((*ideal)[v] > 0.0) rows.try_emplace(v, 0);
    }
  }
  for (const auto& [value, count] : rows) {
    std::vector<json> row{bitstring(value, dist.cbit_count), count, dist.probability(value)};
    if (ideal != nullptr) row.emplace_back((*ideal)[value]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Report start_report(const ExperimentSpec& spec) {
  Report r;
  r.command = spec.command;
  r.spec = spec.to_json();
  return r;
}

std::vector<std::optional<std::size_t>> sweep_counts(const ExperimentSpec& spec) {
  if (!spec.da_channels.empty()) return spec.da_channels;
  std::vector<std::optional<std::size_t>> counts;
  for (std::size_t c = 3; c <= 11; ++c) counts.emplace_back(c);
  counts.emplace_back(std::nullopt);
  return counts;
}

Program timing_program(const ExperimentSpec& spec, const std::string& path) {
  Program p = load_program(path);
  return spec.no_measure ? strip_measurements(p) : p;
}

}  // namespace

json ExperimentSpec::to_json() const {
  json da = json::array();
  for (const auto& n : da_channels) da.push_back(channel_json(n));
  json j = {{"command", command}, {"programs", programs}, {"control", control}, {"trials", trials},
            {"seed", seed},       {"engine", engine},     {"da_channels", da},   {"no_measure", no_measure}};
  if (!device.empty()) j["device"] = device;
  if (window_ns > 0.0) j["window_ns"] = window_ns;
  if (init != 0) j["init"] = init;
  return j;
}

std::optional<std::size_t> parse_channel_count(const std::string& text) {
  if (text == "inf" || text == "infinite" || text == "unlimited") return std::nullopt;
  std::size_t used = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(text, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(fmt::format("bad DA channel count '{}'", text));
  return static_cast<std::size_t>(n);
}

Report cmd_noise(const ExperimentSpec& spec) {
  Report r = start_report(spec);
  const Program program = load_program(single_program(spec));
  const DeviceErrorModel model = require_device(spec);
  if (spec.trials.size() != 1) throw UsageError("noise takes a single --trials value");
  const NoisyCircuit circuit = noisy_circuit(program, model);
  const TraceSet traces = generate_traces(circuit, model, spec.trials.front(), spec.seed);
  RunResult run;
  if (spec.engine == "optimized") {
    run = run_optimized(traces);
  } else if (spec.engine == "brute") {
    run = run_bruteforce(traces);
  } else {
    throw UsageError(fmt::format("unknown engine '{}' (optimized, brute)", spec.engine));
  }
  const std::vector<double> ideal = noiseless_distribution(circuit);
  const DistributionComparison cmp = compare_to_reference(run.distribution, ideal);
  r.summary = {{"program", program.source_name},
               {"qubits", program.qubit_count},
               {"layers", circuit.layers.depth()},
               {"fidelity", cmp.support_mass},
               {"total_variation", cmp.total_variation},
               {"error_free_fraction", error_free_fraction(traces)},
               {"matvec_count", run.metrics.matvec_count},
               {"msv_peak", run.metrics.msv_peak},
               {"trials", run.metrics.trials}};
  r.tables.push_back(distribution_table(run.distribution, &ideal));
  return r;
}

Report cmd_savings(const ExperimentSpec& spec) {
  Report r = start_report(spec);
  const Program program = load_program(single_program(spec));
  const DeviceErrorModel model = require_device(spec);
  const NoisyCircuit circuit = noisy_circuit(program, model);
  Table t{"savings",
          {"trials", "matvec_optimized", "matvec_bruteforce", "normalized_matvec", "savings", "msv_peak",
           "msv_peak_trial_order", "error_free_fraction"},
          {}};
  bool nondecreasing = true;
  double previous = -1.0;
  std::vector<std::uint64_t> counts = spec.trials;
  std::sort(counts.begin(), counts.end());
  for (const std::uint64_t trials : counts) {
    const TraceSet traces = generate_traces(circuit, model, trials, spec.seed);
    const EngineComparison c = compare_engines(traces);
    if (!c.outcomes_identical) {
      throw std::logic_error(fmt::format("engines disagree on per-trial outcomes at {} trials", trials));
    }
    const double savings = c.bruteforce.metrics.matvec_count == 0 ? 0.0 : c.savings();
    nondecreasing = nondecreasing && savings >= previous;
    previous = savings;
    t.rows.push_back({trials, c.optimized.metrics.matvec_count, c.bruteforce.metrics.matvec_count,
                      c.bruteforce.metrics.matvec_count == 0 ? 1.0 : c.normalized_matvec(), savings,
                      c.optimized.metrics.msv_peak, c.trial_order.msv_peak, error_free_fraction(traces)});
  }
  r.summary = {{"program", program.source_name}, {"outcomes_identical", true}, {"savings_nondecreasing", nondecreasing}};
  r.tables.push_back(std::move(t));
  return r;
}

Report cmd_timing(const ExperimentSpec& spec) {
  Report r = start_report(spec);
  const Program program = timing_program(spec, single_program(spec));
  ControlConfig config = control_for(spec);
  if (spec.da_channels.size() > 1) throw UsageError("timing takes a single --da-channels value (use sweep)");
  if (spec.da_channels.size() == 1) config.da_channels = spec.da_channels.front();
  RandomOutcome outcomes(0.5, spec.seed);
  const ExecutionStats stats = simulate(program, config, outcomes);
  r.warnings = stats.warnings;
  json busy = json::array();
  for (const auto& ch : stats.da) busy.push_back(to_ns(ch.busy));
  r.summary = {{"program", program.source_name},
               {"control", to_json(config)},
               {"total_time_ns", stats.total_time_ns()},
               {"da_channels_used", stats.da.size()},
               {"da_busy_ns", busy},
               {"conditionals_fired", stats.conditionals_fired}};

  Table instrs{"instructions",
               {"index", "op", "qubits", "dispatch_ns", "start_ns", "end_ns", "executed", "da", "ad"},
               {}};
  for (const auto& rec : stats.records) {
    instrs.rows.push_back({rec.index, rec.conditional ? "if:" + rec.mnemonic : rec.mnemonic,
                           fmt::format("{}", fmt::join(rec.qubits, " ")), to_ns(rec.dispatch), to_ns(rec.start),
                           to_ns(rec.end), rec.executed, fmt::format("{}", fmt::join(rec.da, " ")),
                           fmt::format("{}", fmt::join(rec.ad, " "))});
  }
  const Picoseconds window = spec.window_ns > 0.0 ? static_cast<Picoseconds>(std::llround(spec.window_ns * 1000.0))
                                                  : config.lat_1q();
  Table util{"utilization", {"window_start_ns", "window_end_ns", "da_utilization", "ad_utilization", "active_peak"}, {}};
  for (const auto& row : utilization_report(stats, std::max<Picoseconds>(window, 1))) {
    util.rows.push_back({to_ns(row.window.start), to_ns(row.window.end), row.da_utilization, row.ad_utilization,
                         row.active_peak});
  }
  Table line{"timeline", {"start_ns", "end_ns", "active", "queued", "da_busy", "ad_busy"}, {}};
  for (const auto& seg : timeline(stats)) {
    line.rows.push_back({to_ns(seg.interval.start), to_ns(seg.interval.end), seg.active, seg.queued, seg.da_busy,
                         seg.ad_busy});
  }
  r.tables = {std::move(instrs), std::move(util), std::move(line)};
  return r;
}

Report cmd_sweep(const ExperimentSpec& spec) {
  Report r = start_report(spec);
  if (spec.programs.empty()) throw UsageError("sweep needs at least one --program");
  const ControlConfig config = control_for(spec);
  const auto counts = sweep_counts(spec);
  const bool has_unlimited = std::any_of(counts.begin(), counts.end(), [](const auto& c) { return !c; });
  Table t{"sweep", {"program", "da_channels", "time_ns", "time_no_measure_ns"}, {}};
  Table per{"programs", {"program", "saving_at_inf", "saving_at_inf_no_measure", "saturation", "monotonic"}, {}};
  double saving_sum = 0.0;
  bool all_monotonic = true;
  for (const auto& path : spec.programs) {
    const Program program = load_program(path);
    const auto points = channel_sweep(program, config, counts, [&]() -> std::unique_ptr<OutcomeSource> {
      return std::make_unique<RandomOutcome>(0.5, spec.seed);
    });
    bool monotonic = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
      t.rows.push_back({program.source_name, channel_json(points[i].da_channels), to_ns(points[i].with_measure),
                        to_ns(points[i].without_measure)});
      if (i > 0) {
        const bool grows = !points[i].da_channels ||
                           (points[i - 1].da_channels && *points[i].da_channels >= *points[i - 1].da_channels);
        if (grows && (points[i].with_measure > points[i - 1].with_measure ||
                      points[i].without_measure > points[i - 1].without_measure)) {
          monotonic = false;
        }
      }
    }
    all_monotonic = all_monotonic && monotonic;
    json saving = nullptr;
    json saving_nm = nullptr;
    if (has_unlimited && points.front().with_measure > 0) {
      const auto& inf = *std::find_if(points.begin(), points.end(), [](const auto& p) { return !p.da_channels; });
      const double s = 1.0 - static_cast<double>(inf.with_measure) / static_cast<double>(points.front().with_measure);
      saving = s;
      if (points.front().without_measure > 0) {
        saving_nm =
            1.0 - static_cast<double>(inf.without_measure) / static_cast<double>(points.front().without_measure);
      }
      saving_sum += spec.no_measure && saving_nm.is_number() ? saving_nm.get<double>() : s;
    }
    const auto sat = saturation_point(points);
    per.rows.push_back({program.source_name, saving, saving_nm, sat ? json(*sat) : json(nullptr), monotonic});
  }
  r.summary = {{"control", to_json(config)}, {"monotonic", all_monotonic}};
  if (has_unlimited) {
    r.summary[spec.no_measure ? "average_saving_at_inf_no_measure" : "average_saving_at_inf"] =
        saving_sum / static_cast<double>(spec.programs.size());
  }
  r.tables = {std::move(t), std::move(per)};
  return r;
}

Report cmd_cosim(const ExperimentSpec& spec) {
  Report r = start_report(spec);
  const Program program = load_program(single_program(spec));
  if (spec.trials.size() != 1) throw UsageError("cosim takes a single --trials value");
  const DeviceErrorModel model =
      spec.device.empty() ? DeviceErrorModel::uniform(program.qubit_count, 0.0) : load_device_model_file(spec.device);
  const CosimResult res = cosimulate(program, control_for(spec), model, {spec.trials.front(), spec.seed, spec.init});
  double fired = 0.0;
  for (const auto n : res.conditionals_fired) fired += static_cast<double>(n);
  r.warnings = res.first_trial.warnings;
  r.summary = {{"program", program.source_name},
               {"delegated_to_noisy_engine", res.delegated},
               {"time_min_ns", to_ns(res.timing.min)},
               {"time_mean_ns", res.timing.mean_ns},
               {"time_max_ns", to_ns(res.timing.max)},
               {"conditionals_fired_mean", fired / static_cast<double>(res.conditionals_fired.size())},
               {"trials", res.distribution.trials}};
  r.tables.push_back(distribution_table(res.distribution, nullptr));
  return r;
}

Report cmd_compare(const ExperimentSpec& spec) {
  Report r = start_report(spec);
  if (spec.programs.size() != 2) throw UsageError("compare takes exactly two --program values");
  ControlConfig config = control_for(spec);
  if (spec.da_channels.size() > 1) throw UsageError("compare takes a single --da-channels value");
  if (spec.da_channels.size() == 1) config.da_channels = spec.da_channels.front();
  std::optional<DeviceErrorModel> model;
  if (!spec.device.empty()) model = load_device_model_file(spec.device);
  if (spec.trials.size() != 1) throw UsageError("compare takes a single --trials value");

  Table t{"compare",
          {"program", "time_ns", "time_no_measure_ns", "time_ratio", "time_no_measure_ratio"},
          {}};
  if (model) t.columns.insert(t.columns.end(), {"fidelity", "fidelity_ratio"});
  std::vector<double> base;
  for (const auto& path : spec.programs) {
    const Program program = load_program(path);
    ConstantOutcome zero(0);
    const double with = simulate(program, config, zero).total_time_ns();
    const double without = simulate(strip_measurements(program), config, zero).total_time_ns();
    std::vector<double> values{with, without};
    if (model) {
      const NoisyCircuit circuit = noisy_circuit(program, *model);
      const RunResult run = run_optimized(generate_traces(circuit, *model, spec.trials.front(), spec.seed));
      values.push_back(compare_to_reference(run.distribution, noiseless_distribution(circuit)).support_mass);
    }
    if (base.empty()) base = values;
    auto ratio = [](double v, double b) { return b == 0.0 ? (v == 0.0 ? json(1.0) : json(nullptr)) : json(v / b); };
    std::vector<json> row{program.source_name, values[0], values[1], ratio(values[0], base[0]), ratio(values[1], base[1])};
    if (model) {
      row.emplace_back(values[2]);
      row.push_back(ratio(values[2], base[2]));
    }
    t.rows.push_back(std::move(row));
  }
  r.summary = {{"control", to_json(config)}, {"baseline", spec.programs.front()}};
  r.tables.push_back(std::move(t));
  return r;
}

Report run_experiment(const ExperimentSpec& spec) {
  if (spec.command == "noise") return cmd_noise(spec);
  if (spec.command == "savings") return cmd_savings(spec);
  if (spec.command == "timing") return cmd_timing(spec);
  if (spec.command == "sweep") return cmd_sweep(spec);
  if (spec.command == "cosim") return cmd_cosim(spec);
  if (spec.command == "compare") return cmd_compare(spec);
  throw UsageError(fmt::format("unknown command '{}'", spec.command));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy quantum program and control-system simulator"};
  app.require_subcommand(1);
  ExperimentSpec spec;
  std::vector<std::string> da_text;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"noise", "Monte-Carlo noisy simulation of one program"},
      {"savings", "Optimized vs brute-force computation on identical traces"},
      {"timing", "Control-system timing and utilization of one program"},
      {"sweep", "Total time across DA channel counts"},
      {"cosim", "Noisy simulation driven by the control-system model"},
      {"compare", "Two programs side by side, normalized to the first"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--program", spec.programs, "OpenQASM program (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--device", spec.device, "Device error-model file")->check(CLI::ExistingFile);
    sub->add_option("--control", spec.control, "Control preset (qcb-baseline, ibm-experimental) or config file")
        ->check([](const std::string& v) {
          if (v == "qcb-baseline" || v == "ibm-experimental" || std::filesystem::is_regular_file(v)) {
            return std::string();
          }
          return fmt::format("'{}' is neither a preset nor a readable file", v);
        });
    sub->add_option("--trials", spec.trials, "Trial count, or a comma list for savings")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", spec.seed, "Random seed");
    sub->add_option("--engine", spec.engine, "Noisy engine")->check(CLI::IsMember({"optimized", "brute"}));
    sub->add_option("--da-channels", da_text, "DA channel count(s), comma separated; 'inf' for unlimited")
        ->delimiter(',');
    sub->add_flag("--no-measure", spec.no_measure, "Drop measurement instructions");
    sub->add_option("--format", spec.format, "Output format")->check(CLI::IsMember({"text", "structured", "csv"}));
    sub->add_option("--out", spec.out, "Write the report here instead of stdout");
    sub->add_option("--window", spec.window_ns, "Utilization window in ns (timing)")->check(CLI::NonNegativeNumber);
    sub->add_option("--init", spec.init, "Initial basis state (cosim)");
    sub->callback([&spec, name = name]() { spec.command = name; });
  }

  std::vector<const char*> argv{"nisqsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& d : da_text) spec.da_channels.push_back(parse_channel_count(d));
    const Report report = run_experiment(spec);
    const std::string text = render(report, parse_report_format(spec.format));
    if (spec.out.empty()) {
      out << text;
    } else {
      write_file_atomically(spec.out, text);
    }
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace nisqsim
