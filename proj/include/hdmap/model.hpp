#pragma once

// Domain types for RSU-to-vehicle map distribution, scenario validation,
// seeded scenario generation and the vehicle trace CSV format.
//
// Units: data in MB, rates in MB/s, distances in meters (route lengths in
// km), time in seconds, power in watts, vehicle energy in kWh.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hdmap/error.hpp"
#include "hdmap/random.hpp"

namespace hdmap {

using RsuId = std::int32_t;
using VehicleId = std::int32_t;

inline constexpr double kJoulesPerKwh = 3.6e6;
inline constexpr double kKmPerMile = 1.609344;

// The crossroad is three straight branches meeting at position 0.
enum class Branch { A, B, C };
inline constexpr std::array<Branch, 3> kBranches{Branch::A, Branch::B, Branch::C};

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::A: return "A";
    case Branch::B: return "B";
    case Branch::C: return "C";
  }
  return "?";
}

inline std::optional<Branch> parse_branch(std::string_view s) {
  if (s == "A") return Branch::A;
  if (s == "B") return Branch::B;
  if (s == "C") return Branch::C;
  return std::nullopt;
}

struct Rsu {
  RsuId id = 0;
  Branch branch = Branch::A;
  double position_m = 0.0;         // along the branch, from the crossroad
  double lane_offset_m = 0.0;      // perpendicular distance to the lane
  double coverage_radius_m = 0.0;
  double bandwidth_mb_s = 0.0;
  double tx_power_max_w = 0.0;

  // Half length of the lane segment inside coverage; 0 when the lane is
  // never covered.
  double half_chord_m() const {
    const double r2 = coverage_radius_m * coverage_radius_m;
    const double d2 = lane_offset_m * lane_offset_m;
    return d2 >= r2 ? 0.0 : std::sqrt(r2 - d2);
  }

  bool operator==(const Rsu&) const = default;
};

struct MapDemand {
  double full_mb = 0.0;
  double basic_mb = 0.0;

  bool operator==(const MapDemand&) const = default;
};

struct Vehicle {
  VehicleId id = 0;
  double entry_time_s = 0.0;
  double speed_mps = 0.0;
  Branch branch = Branch::A;
  double energy_remaining_kwh = 0.0;
  double route_length_km = 0.0;
  MapDemand demand;

  bool operator==(const Vehicle&) const = default;
};

struct ChannelParams {
  double path_loss_exponent = 2.5;
  double fading_gain = 60.0;
  double noise_psd = 0.3;
  double rx_bandwidth_default = 2000.0;  // receiver-side cap on link bandwidth

  bool operator==(const ChannelParams&) const = default;
};

struct EnergyParams {
  double drive_rate_kwh_per_km = 0.2;
  double rx_power_w = 10.0;

  bool operator==(const EnergyParams&) const = default;
};

struct Scenario {
  std::vector<Rsu> rsus;
  std::vector<Vehicle> vehicles;
  ChannelParams channel;
  EnergyParams energy;
  double meeting_probability = 0.004;
  std::uint64_t seed = 0;
  double time_step_s = 0.1;

  bool operator==(const Scenario&) const = default;

  // RSUs on one branch, ordered by position.
  std::vector<const Rsu*> rsus_on(Branch b) const {
    std::vector<const Rsu*> out;
    for (const auto& r : rsus)
      if (r.branch == b) out.push_back(&r);
    std::stable_sort(out.begin(), out.end(), [](const Rsu* x, const Rsu* y) {
      return x->position_m != y->position_m ? x->position_m < y->position_m : x->id < y->id;
    });
    return out;
  }

  const Rsu* find_rsu(RsuId id) const {
    for (const auto& r : rsus)
      if (r.id == id) return &r;
    return nullptr;
  }
};

// One RSU's share of a vehicle's transfer.
struct PlanEntry {
  RsuId rsu_id = 0;
  bool engaged = false;  // c_i^j
  double time_s = 0.0;   // t_i^j
  double data_mb = 0.0;
  double fraction = 0.0;  // alpha_i = data_mb / delivered_mb

  bool operator==(const PlanEntry&) const = default;
};

struct AllocationPlan {
  VehicleId vehicle_id = -1;
  std::vector<PlanEntry> entries;
  double demand_mb = 0.0;
  double total_time_s = 0.0;
  double delivered_mb = 0.0;
  bool degraded = false;  // basic demand substituted for the full one

  std::size_t engaged_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const PlanEntry& e) { return e.engaged; }));
  }

  bool operator==(const AllocationPlan&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string where;
  std::string what;
};

inline std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  auto add = [&](std::string where, std::string what) {
    out.push_back({std::move(where), std::move(what)});
  };
  auto finite = [](double x) { return std::isfinite(x); };

  std::set<RsuId> rsu_ids;
  for (std::size_t i = 0; i < s.rsus.size(); ++i) {
    const Rsu& r = s.rsus[i];
    const std::string where = "rsus[" + std::to_string(i) + "] (id " + std::to_string(r.id) + ")";
    if (!rsu_ids.insert(r.id).second) add(where, "duplicate RSU id");
    if (!finite(r.position_m)) add(where, "position_m must be finite");
    if (!(r.coverage_radius_m > 0) || !finite(r.coverage_radius_m))
      add(where, "coverage_radius_m must be > 0");
    if (!(r.lane_offset_m >= 0))
      add(where, "lane_offset_m must be >= 0");
    else if (!(r.lane_offset_m < r.coverage_radius_m))
      add(where, "lane_offset_m must be < coverage_radius_m (lane never covered)");
    if (!(r.bandwidth_mb_s > 0) || !finite(r.bandwidth_mb_s)) add(where, "bandwidth must be > 0");
    if (!(r.tx_power_max_w > 0) || !finite(r.tx_power_max_w))
      add(where, "tx_power_max_w must be > 0");
  }

  std::set<VehicleId> vehicle_ids;
  for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
    const Vehicle& v = s.vehicles[i];
    const std::string where =
        "vehicles[" + std::to_string(i) + "] (id " + std::to_string(v.id) + ")";
    if (!vehicle_ids.insert(v.id).second) add(where, "duplicate vehicle id");
    if (!finite(v.entry_time_s)) add(where, "entry_time_s must be finite");
    if (!(v.speed_mps > 0) || !finite(v.speed_mps)) add(where, "speed_mps must be > 0");
    if (!(v.energy_remaining_kwh >= 0) || !finite(v.energy_remaining_kwh))
      add(where, "energy_remaining_kwh must be >= 0");
    if (!(v.route_length_km > 0) || !finite(v.route_length_km))
      add(where, "route_length_km must be > 0");
    if (!(v.demand.basic_mb > 0) || !(v.demand.basic_mb <= v.demand.full_mb) ||
        !finite(v.demand.full_mb))
      add(where, "demand must satisfy 0 < basic_mb <= full_mb");
  }

  const ChannelParams& c = s.channel;
  if (!(c.path_loss_exponent > 0)) add("channel", "path_loss_exponent must be > 0");
  if (!(c.fading_gain > 0)) add("channel", "fading_gain must be > 0");
  if (!(c.noise_psd > 0)) add("channel", "noise_psd must be > 0");
  if (!(c.rx_bandwidth_default > 0)) add("channel", "rx_bandwidth_default must be > 0");

  if (!(s.energy.drive_rate_kwh_per_km > 0)) add("energy", "drive_rate_kwh_per_km must be > 0");
  if (!(s.energy.rx_power_w > 0)) add("energy", "rx_power_w must be > 0");

  if (!(s.meeting_probability > 0 && s.meeting_probability < 1))
    add("scenario", "meeting_probability must be in (0, 1)");
  if (!(s.time_step_s > 0)) add("scenario", "time_step_s must be > 0");
  return out;
}

// ---------------------------------------------------------------------------
// Generation

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Defaults describe the reference crossroad: 60 RSUs, 251 vehicles split
// 95/94/62 over branches A/B/C during a 10-minute window.
struct GeneratorParams {
  std::size_t rsu_count = 60;
  Range coverage_radius_m{100.0, 100.0};
  Range rsu_spacing_m{50.0, 150.0};
  Range lane_offset_m{20.0, 70.0};
  Range bandwidth_mb_s{1000.0, 2000.0};
  Range tx_power_w{10.0, 40.0};

  double path_loss_exponent = 2.5;
  double fading_gain = 60.0;
  double noise_psd = 0.3;
  double rx_bandwidth_default = 2000.0;

  Range drive_rate_kwh_per_km{0.15, 0.25};
  double rx_power_w = 10.0;

  std::size_t vehicle_count = 251;
  std::array<double, 3> branch_weights{95.0, 94.0, 62.0};
  double horizon_s = 600.0;
  Range speed_mps{10.0, 30.0};
  Range energy_kwh{4.0, 6.0};
  Range route_length_km{5.0, 15.0};
  Range demand_full_mb{60000.0, 60000.0};
  double basic_mb_per_mile = 60.0;

  double meeting_probability = 0.004;
  double time_step_s = 0.1;
};

// Splits `total` proportionally to `weights`, largest remainder first (ties
// to the lower index). Sums exactly to `total`.
inline std::vector<std::size_t> proportional_split(std::size_t total,
                                                   const std::vector<double>& weights) {
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  std::vector<std::size_t> out(weights.size(), 0);
  if (weights.empty() || !(wsum > 0)) return out;
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / wsum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[rem[k % rem.size()].second];
  return out;
}

inline void check_generator_params(const GeneratorParams& p) {
  auto range = [](const Range& r, const char* name, bool allow_zero = false) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
      throw InvalidArgument(std::string(name) + ": empty or non-finite range");
    if (allow_zero ? r.lo < 0 : r.lo <= 0)
      throw InvalidArgument(std::string(name) + ": range must be positive");
  };
  range(p.coverage_radius_m, "coverage_radius_m");
  range(p.rsu_spacing_m, "rsu_spacing_m");
  range(p.lane_offset_m, "lane_offset_m", true);
  range(p.bandwidth_mb_s, "bandwidth_mb_s");
  range(p.tx_power_w, "tx_power_w");
  range(p.drive_rate_kwh_per_km, "drive_rate_kwh_per_km");
  range(p.speed_mps, "speed_mps");
  range(p.energy_kwh, "energy_kwh", true);
  range(p.route_length_km, "route_length_km");
  range(p.demand_full_mb, "demand_full_mb");
  if (p.lane_offset_m.hi >= p.coverage_radius_m.lo)
    throw InvalidArgument("lane_offset_m upper bound must be below coverage_radius_m");
  if (!(p.path_loss_exponent > 0) || !(p.fading_gain > 0) || !(p.noise_psd > 0) ||
      !(p.rx_bandwidth_default > 0))
    throw InvalidArgument("channel parameters must be positive");
  if (!(p.rx_power_w > 0)) throw InvalidArgument("rx_power_w must be positive");
  if (!(p.horizon_s >= 0)) throw InvalidArgument("horizon_s must be >= 0");
  if (!(p.basic_mb_per_mile > 0)) throw InvalidArgument("basic_mb_per_mile must be positive");
  if (!(p.meeting_probability > 0 && p.meeting_probability < 1))
    throw InvalidArgument("meeting_probability must be in (0, 1)");
  if (!(p.time_step_s > 0)) throw InvalidArgument("time_step_s must be positive");
  for (double w : p.branch_weights)
    if (!(w >= 0)) throw InvalidArgument("branch weights must be non-negative");
  if (p.vehicle_count > 0 && !(p.branch_weights[0] + p.branch_weights[1] + p.branch_weights[2] > 0))
    throw InvalidArgument("branch weights must not all be zero");
}

// Basic-layer demand for a route: lane/road plus semantic layers per mile.
inline double basic_demand_mb(double route_length_km, double mb_per_mile) {
  return mb_per_mile * route_length_km / kKmPerMile;
}

// Pure function of (params, seed).
inline Scenario generate_scenario(const GeneratorParams& p, std::uint64_t seed) {
  check_generator_params(p);
  Rng rng(seed);
  Scenario s;
  s.seed = seed;
  s.meeting_probability = p.meeting_probability;
  s.time_step_s = p.time_step_s;
  s.channel = {p.path_loss_exponent, p.fading_gain, p.noise_psd, p.rx_bandwidth_default};
  s.energy.drive_rate_kwh_per_km = rng.uniform(p.drive_rate_kwh_per_km.lo, p.drive_rate_kwh_per_km.hi);
  s.energy.rx_power_w = p.rx_power_w;

  const auto per_branch = proportional_split(p.rsu_count, {1.0, 1.0, 1.0});
  RsuId next_id = 0;
  for (std::size_t b = 0; b < kBranches.size(); ++b) {
    double position = 0.0;
    for (std::size_t i = 0; i < per_branch[b]; ++i) {
      Rsu r;
      r.id = next_id++;
      r.branch = kBranches[b];
      r.coverage_radius_m = rng.uniform(p.coverage_radius_m.lo, p.coverage_radius_m.hi);
      // The first coverage disc starts at the crossroad.
      position = i == 0 ? r.coverage_radius_m : position + rng.uniform(p.rsu_spacing_m.lo, p.rsu_spacing_m.hi);
      r.position_m = position;
      r.lane_offset_m = rng.uniform(p.lane_offset_m.lo, p.lane_offset_m.hi);
      r.bandwidth_mb_s = rng.uniform(p.bandwidth_mb_s.lo, p.bandwidth_mb_s.hi);
      r.tx_power_max_w = rng.uniform(p.tx_power_w.lo, p.tx_power_w.hi);
      s.rsus.push_back(r);
    }
  }

  const auto counts = proportional_split(
      p.vehicle_count, {p.branch_weights[0], p.branch_weights[1], p.branch_weights[2]});
  std::vector<Branch> labels;
  for (std::size_t b = 0; b < counts.size(); ++b) labels.insert(labels.end(), counts[b], kBranches[b]);
  rng.shuffle(labels);

  std::vector<double> entries(p.vehicle_count);
  for (auto& t : entries) t = rng.uniform(0.0, p.horizon_s);
  std::sort(entries.begin(), entries.end());

  for (std::size_t i = 0; i < p.vehicle_count; ++i) {
    Vehicle v;
    v.id = static_cast<VehicleId>(i);
    v.entry_time_s = entries[i];
    v.branch = labels[i];
    v.speed_mps = rng.uniform(p.speed_mps.lo, p.speed_mps.hi);
    v.energy_remaining_kwh = rng.uniform(p.energy_kwh.lo, p.energy_kwh.hi);
    v.route_length_km = rng.uniform(p.route_length_km.lo, p.route_length_km.hi);
    v.demand.full_mb = rng.uniform(p.demand_full_mb.lo, p.demand_full_mb.hi);
    v.demand.basic_mb =
        std::min(v.demand.full_mb, basic_demand_mb(v.route_length_km, p.basic_mb_per_mile));
    s.vehicles.push_back(v);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Trace CSV

inline constexpr std::string_view kTraceHeader =
    "vehicle_id,entry_time_s,speed_mps,branch,energy_kwh,demand_full_mb,demand_basic_mb";

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view field, std::size_t line, const char* column) {
  const std::string tmp(trim(field));
  if (tmp.empty()) throw ParseError(line, column, "empty field");
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || !std::isfinite(v))
    throw ParseError(line, column, "not a number: '" + tmp + "'");
  return v;
}

inline long long parse_int(std::string_view field, std::size_t line, const char* column) {
  const std::string tmp(trim(field));
  if (tmp.empty()) throw ParseError(line, column, "empty field");
  char* end = nullptr;
  const long long v = std::strtoll(tmp.c_str(), &end, 10);
  if (end != tmp.c_str() + tmp.size()) throw ParseError(line, column, "not an integer: '" + tmp + "'");
  return v;
}

inline std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// The trace carries no route length, so every parsed vehicle receives
// `route_length_km`.
inline std::vector<Vehicle> parse_trace(std::string_view csv_text, double route_length_km = 10.0) {
  static constexpr std::array<const char*, 7> kColumns{
      "vehicle_id", "entry_time_s", "speed_mps", "branch", "energy_kwh", "demand_full_mb",
      "demand_basic_mb"};
  std::vector<Vehicle> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start <= csv_text.size()) {
    auto end = csv_text.find('\n', start);
    if (end == std::string_view::npos) end = csv_text.size();
    const std::string_view line = detail::trim(csv_text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == csv_text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader) throw ParseError(line_no, "", "trace header mismatch");
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (fields.size() != kColumns.size())
      throw ParseError(line_no, "", "expected 7 fields, found " + std::to_string(fields.size()));
    Vehicle v;
    v.id = static_cast<VehicleId>(detail::parse_int(fields[0], line_no, kColumns[0]));
    v.entry_time_s = detail::parse_double(fields[1], line_no, kColumns[1]);
    v.speed_mps = detail::parse_double(fields[2], line_no, kColumns[2]);
    const auto branch = parse_branch(detail::trim(fields[3]));
    if (!branch)
      throw ParseError(line_no, kColumns[3],
                       "unknown branch '" + std::string(detail::trim(fields[3])) + "'");
    v.branch = *branch;
    v.energy_remaining_kwh = detail::parse_double(fields[4], line_no, kColumns[4]);
    v.demand.full_mb = detail::parse_double(fields[5], line_no, kColumns[5]);
    v.demand.basic_mb = detail::parse_double(fields[6], line_no, kColumns[6]);
    v.route_length_km = route_length_km;
    out.push_back(v);
    if (end == csv_text.size()) break;
  }
  if (!header_seen) throw ParseError(1, "", "missing trace header");
  return out;
}

inline std::string serialize_trace(const std::vector<Vehicle>& vehicles) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& v : vehicles) {
    out += std::to_string(v.id);
    for (double x : {v.entry_time_s, v.speed_mps}) out += ',' + detail::format_g17(x);
    out += ',';
    out += to_string(v.branch);
    for (double x : {v.energy_remaining_kwh, v.demand.full_mb, v.demand.basic_mb})
      out += ',' + detail::format_g17(x);
    out += '\n';
  }
  return out;
}

}  // namespace hdmap
