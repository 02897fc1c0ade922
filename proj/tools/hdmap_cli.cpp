// hdmap: scenario generation, single runs, parameter sweeps and V2V
// feasibility calculators.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdmap/hdmap.hpp"

namespace {

using namespace hdmap;

// "190G" -> 190000 MB, "5000" -> 5000 MB.
double parse_volume_mb(const std::string& text) {
  std::string s = text;
  double scale = 1.0;
  if (!s.empty() && (s.back() == 'G' || s.back() == 'g')) {
    scale = 1000.0;
    s.pop_back();
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw InvalidArgument("bad data volume '" + text + "'");
  return v * scale;
}

// "lo:hi" or a single value.
Range parse_range(const std::string& text) {
  const auto colon = text.find(':');
  auto num = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw InvalidArgument("bad range '" + text + "'");
    return v;
  };
  if (colon == std::string::npos) {
    const double v = num(text);
    return {v, v};
  }
  return {num(text.substr(0, colon)), num(text.substr(colon + 1))};
}

Range parse_volume_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const double v = parse_volume_mb(text);
    return {v, v};
  }
  return {parse_volume_mb(text.substr(0, colon)), parse_volume_mb(text.substr(colon + 1))};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

std::vector<engine::Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  if (names.empty()) throw InvalidArgument("algorithm list is empty");
  std::vector<engine::Algorithm> out;
  for (const auto& n : names) out.push_back(engine::Algorithm::parse(n));
  return out;
}

// Errors the user can fix by changing flags: exit code 2.
struct UsageError : Error {
  using Error::Error;
};

struct GenerateArgs {
  std::uint64_t seed = 1;
  std::string out;
  std::string trace;
  std::size_t vehicles = 251;
  std::size_t rsus = 60;
  std::string speed, energy, demand, bandwidth, offset, tx_power, spacing, route;
  std::optional<double> fading_gain, meeting_probability, step_s, horizon_s, route_km;
};

void cmd_generate(const GenerateArgs& a) {
  GeneratorParams p;
  p.vehicle_count = a.vehicles;
  p.rsu_count = a.rsus;
  if (!a.speed.empty()) p.speed_mps = parse_range(a.speed);
  if (!a.energy.empty()) p.energy_kwh = parse_range(a.energy);
  if (!a.demand.empty()) p.demand_full_mb = parse_volume_range(a.demand);
  if (!a.bandwidth.empty()) p.bandwidth_mb_s = parse_range(a.bandwidth);
  if (!a.offset.empty()) p.lane_offset_m = parse_range(a.offset);
  if (!a.tx_power.empty()) p.tx_power_w = parse_range(a.tx_power);
  if (!a.spacing.empty()) p.rsu_spacing_m = parse_range(a.spacing);
  if (!a.route.empty()) p.route_length_km = parse_range(a.route);
  if (a.fading_gain) p.fading_gain = *a.fading_gain;
  if (a.meeting_probability) p.meeting_probability = *a.meeting_probability;
  if (a.step_s) p.time_step_s = *a.step_s;
  if (a.horizon_s) p.horizon_s = *a.horizon_s;

  Scenario s;
  try {
    s = generate_scenario(p, a.seed);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (!a.trace.empty()) {
    // Replace the generated vehicles with the trace; RSUs and parameters stay.
    s.vehicles = parse_trace(read_file(a.trace), a.route_km.value_or(10.0));
    const auto problems = validate_scenario(s);
    if (!problems.empty())
      throw UsageError("trace: " + problems.front().where + ": " + problems.front().what);
  }
  emit(a.out, dump_scenario(s));
}

struct RunArgs {
  std::string scenario;
  std::string algorithm;
  std::string out;
  std::string detail;
  std::string json;
  std::optional<double> step_s;
  bool no_contention = false;
  bool renormalize = false;
};

engine::RunOptions run_options(std::optional<double> step_s, bool no_contention, bool renormalize) {
  engine::RunOptions o;
  o.contention = !no_contention;
  o.renormalize = renormalize;
  if (step_s) {
    if (!(*step_s > 0)) throw UsageError("--step-s must be > 0");
    o.time_step_s = step_s;
  }
  return o;
}

void append_report(const std::string& path, const std::string& row) {
  if (path.empty() || path == "-") {
    std::cout << metrics::kReportCsvHeader << '\n' << row;
    return;
  }
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot write '" + path + "'");
  if (fresh) out << metrics::kReportCsvHeader << '\n';
  out << row;
}

void cmd_run(const RunArgs& a) {
  engine::Algorithm algo;
  try {
    algo = engine::Algorithm::parse(a.algorithm);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const Scenario s = load_scenario_file(a.scenario);
  const auto result = engine::run_scenario(s, algo, run_options(a.step_s, a.no_contention, a.renormalize));
  append_report(a.out, metrics::report_csv_row(metrics::summarize(result)));
  if (!a.detail.empty()) emit(a.detail, engine::vehicle_rows_csv(result));
  if (!a.json.empty()) emit(a.json, engine::to_json(result).dump(2) + "\n");
}

struct SweepArgs {
  std::string scenario;
  std::string from, to, step;
  std::vector<std::string> algorithms{"etdm", "oa", "pta:0.3", "pta:0.7"};
  double budget_kwh = 5.0;
  std::size_t threads = 1;
  std::string out;
  std::optional<double> step_s;
  bool no_contention = false;
  bool renormalize = false;
};

void cmd_sweep_volume(const SweepArgs& a) {
  sweep::VolumeSweep cfg;
  std::vector<engine::Algorithm> algos;
  engine::RunOptions opts;
  try {
    if (!a.from.empty()) cfg.from_mb = parse_volume_mb(a.from);
    if (!a.to.empty()) cfg.to_mb = parse_volume_mb(a.to);
    if (!a.step.empty()) cfg.step_mb = parse_volume_mb(a.step);
    cfg.budget_kwh = a.budget_kwh;
    algos = parse_algorithms(a.algorithms);
    opts = run_options(a.step_s, a.no_contention, a.renormalize);
    sweep::sweep_points(cfg.from_mb, cfg.to_mb, cfg.step_mb);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const Scenario s = load_scenario_file(a.scenario);
  emit(a.out, sweep::to_csv(sweep::sweep_volume(s, cfg, algos, opts, a.threads)));
}

void cmd_sweep_traffic(const SweepArgs& a) {
  sweep::TrafficSweep cfg;
  std::vector<engine::Algorithm> algos;
  engine::RunOptions opts;
  auto count = [](const std::string& s) -> std::size_t {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || v < 0) throw InvalidArgument("bad vehicle count '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  try {
    if (!a.from.empty()) cfg.from_n = count(a.from);
    if (!a.to.empty()) cfg.to_n = count(a.to);
    if (!a.step.empty()) cfg.step_n = count(a.step);
    algos = parse_algorithms(a.algorithms);
    opts = run_options(a.step_s, a.no_contention, a.renormalize);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const Scenario s = load_scenario_file(a.scenario);
  try {
    emit(a.out, sweep::to_csv(sweep::sweep_traffic(s, cfg, algos, opts, a.threads)));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

struct FeasibilityArgs {
  double range_m = 0, offset_m = 0, v1 = 0, v2 = 0;
  std::string direction = "opposite";
  std::optional<double> rate, data, reverse_vehicles, observation_time;
};

void print_kv(const char* key, double v) { std::printf("%s=%.10g\n", key, v); }

void cmd_feasibility(const FeasibilityArgs& a) {
  feasibility::V2vQuery q;
  q.range_m = a.range_m;
  q.lateral_offset_m = a.offset_m;
  q.speed1_mps = a.v1;
  q.speed2_mps = a.v2;
  std::printf("direction=%s\n", a.direction.c_str());
  double contact = 0.0;
  try {
    contact = a.direction == "same" ? feasibility::contact_time_same_direction(q)
                                    : feasibility::contact_time_opposite(q);
  } catch (const feasibility::InfiniteContact&) {
    std::printf("contact_time_s=inf\nnote=infinite contact: equal speeds never separate\n");
    return;
  } catch (const feasibility::UndefinedContact&) {
    std::printf("contact_time_s=undefined\nnote=closing speed is zero\n");
    return;
  }
  print_kv("contact_time_s", contact);
  if (!a.rate) return;
  const double capacity = feasibility::contact_capacity(contact, *a.rate);
  print_kv("contact_capacity_mb", capacity);
  if (!a.data) return;
  if (!(capacity > 0)) {
    std::printf("vehicles_needed=unbounded\n");
    return;
  }
  const auto num = feasibility::vehicles_needed(*a.data, capacity);
  std::printf("vehicles_needed=%llu\n", static_cast<unsigned long long>(num));
  const double ideal = feasibility::v2v_distance_required(static_cast<double>(num), a.v1, contact, 1.0);
  print_kv("ideal_distance_m", ideal);
  if (!a.reverse_vehicles || !a.observation_time) return;
  const double p =
      feasibility::meeting_probability(*a.reverse_vehicles, a.range_m, a.v1, *a.observation_time);
  print_kv("participation_probability", p);
  try {
    print_kv("distance_m", feasibility::v2v_distance_required(static_cast<double>(num), a.v1, contact, p));
  } catch (const feasibility::Infeasible&) {
    std::printf("distance_m=inf\nnote=no vehicles participate\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HD-map distribution simulator"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a random scenario as JSON");
  g->add_option("--seed", gen.seed, "Scenario seed");
  g->add_option("--out", gen.out, "Output path (stdout when omitted)");
  g->add_option("--vehicles", gen.vehicles, "Vehicle count, split 95:94:62 across branches A/B/C");
  g->add_option("--rsus", gen.rsus, "RSU count, split evenly across branches");
  g->add_option("--speed", gen.speed, "Vehicle speed range m/s (lo:hi)");
  g->add_option("--energy", gen.energy, "Remaining energy range kWh (lo:hi)");
  g->add_option("--demand", gen.demand, "Full map demand, MB or with G suffix (lo:hi)");
  g->add_option("--bandwidth", gen.bandwidth, "RSU bandwidth range MB/s (lo:hi)");
  g->add_option("--offset", gen.offset, "RSU lane offset range m (lo:hi)");
  g->add_option("--tx-power", gen.tx_power, "RSU transmit power range W (lo:hi)");
  g->add_option("--spacing", gen.spacing, "Gap between neighbouring RSUs m (lo:hi)");
  g->add_option("--route", gen.route, "Route length range km (lo:hi)");
  g->add_option("--fading-gain", gen.fading_gain, "Channel fading gain |h1|");
  g->add_option("--meeting-probability", gen.meeting_probability, "Pairwise meeting probability p");
  g->add_option("--horizon-s", gen.horizon_s, "Window over which vehicles enter");
  g->add_option("--step-s", gen.step_s, "Simulation time step");
  g->add_option("--trace", gen.trace, "Take vehicles from a CSV trace instead");
  g->add_option("--route-km", gen.route_km, "Route length for trace vehicles (default 10)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Simulate one algorithm on a scenario");
  r->add_option("scenario", run.scenario, "Scenario JSON")->required();
  r->add_option("algorithm", run.algorithm, "etdm, oa or pta:<q>")->required();
  r->add_option("--out", run.out, "Append the report row to this CSV");
  r->add_option("--detail", run.detail, "Per-vehicle CSV");
  r->add_option("--json", run.json, "Full result as JSON");
  r->add_option("--step-s", run.step_s, "Override the scenario time step");
  r->add_flag("--no-contention", run.no_contention, "Solo rates everywhere, planning included");
  r->add_flag("--renormalize", run.renormalize, "Renormalize the truncated contention weights");

  SweepArgs vol;
  auto* sv = app.add_subcommand("sweep-volume", "Sweep the full map demand at a fixed energy budget");
  sv->add_option("scenario", vol.scenario, "Base scenario JSON")->required();
  sv->add_option("--from", vol.from, "First demand (default 140G)");
  sv->add_option("--to", vol.to, "Last demand (default 300G)");
  sv->add_option("--step", vol.step, "Demand step (default 10G)");
  sv->add_option("--budget", vol.budget_kwh, "Energy budget per vehicle, kWh");

  SweepArgs traf;
  auto* st = app.add_subcommand("sweep-traffic", "Sweep the number of vehicles");
  st->add_option("scenario", traf.scenario, "Base scenario JSON")->required();
  st->add_option("--from", traf.from, "First vehicle count (default 10)");
  st->add_option("--to", traf.to, "Last vehicle count (default 250)");
  st->add_option("--step", traf.step, "Vehicle count step (default 10)");

  for (auto [cmd, args] : {std::pair{sv, &vol}, std::pair{st, &traf}}) {
    cmd->add_option("--algorithms", args->algorithms, "Comma-separated algorithms")->delimiter(',');
    cmd->add_option("--threads", args->threads, "Worker threads");
    cmd->add_option("--out", args->out, "Output CSV (stdout when omitted)");
    cmd->add_option("--step-s", args->step_s, "Override the scenario time step");
    cmd->add_flag("--no-contention", args->no_contention, "Solo rates everywhere, planning included");
    cmd->add_flag("--renormalize", args->renormalize, "Renormalize the truncated contention weights");
  }

  FeasibilityArgs fz;
  auto* f = app.add_subcommand("feasibility", "V2V contact and transfer calculators");
  f->add_option("--range", fz.range_m, "Radio range r, m")->required();
  f->add_option("--offset", fz.offset_m, "Distance d between the vehicles' paths, m")->required();
  f->add_option("--v1", fz.v1, "Speed of the first vehicle, m/s")->required();
  f->add_option("--v2", fz.v2, "Speed of the second vehicle, m/s")->required();
  f->add_option("--direction", fz.direction, "opposite or same")
      ->check(CLI::IsMember({"opposite", "same"}));
  f->add_option("--rate", fz.rate, "Link rate, MB/s");
  f->add_option("--data", fz.data, "Map data to collect, MB");
  f->add_option("--reverse-vehicles", fz.reverse_vehicles, "Vehicles m in the reverse lane");
  f->add_option("--observation-time", fz.observation_time, "Observation window t, s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*g) cmd_generate(gen);
    if (*r) cmd_run(run);
    if (*sv) cmd_sweep_volume(vol);
    if (*st) cmd_sweep_traffic(traf);
    if (*f) cmd_feasibility(fz);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
