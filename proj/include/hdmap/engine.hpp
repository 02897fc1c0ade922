#pragma once

// Discrete-time simulation of vehicles driving their branches and pulling map
// data from RSUs. Each step evaluates, per RSU, how many vehicles it is
// serving and gives every engaged link the interference-limited rate for
// that occupancy. Link time inside a step is integrated exactly (a link that
// covers a fraction of a step, or finishes its demand mid-step, is charged
// only that fraction).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hdmap/channel.hpp"
#include "hdmap/energy.hpp"
#include "hdmap/error.hpp"
#include "hdmap/model.hpp"
#include "hdmap/random.hpp"
#include "hdmap/scheduler.hpp"

namespace hdmap::engine {

enum class AlgorithmKind { Etdm, Oa, Pta };

struct Algorithm {
  AlgorithmKind kind = AlgorithmKind::Etdm;
  double q = 1.0;  // PTA engage probability

  static Algorithm etdm() { return {AlgorithmKind::Etdm, 1.0}; }
  static Algorithm oa() { return {AlgorithmKind::Oa, 1.0}; }
  static Algorithm pta(double q) {
    if (!(q >= 0 && q <= 1)) throw InvalidArgument("pta: engage probability must be in [0, 1]");
    return {AlgorithmKind::Pta, q};
  }

  std::string label() const {
    switch (kind) {
      case AlgorithmKind::Etdm: return "etdm";
      case AlgorithmKind::Oa: return "oa";
      case AlgorithmKind::Pta: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "pta:%g", q);
        return buf;
      }
    }
    return "?";
  }

  // "etdm", "oa" or "pta:<q>" with q in [0, 1].
  static Algorithm parse(std::string_view s) {
    if (s == "etdm") return etdm();
    if (s == "oa") return oa();
    if (s.substr(0, 4) == "pta:") {
      const std::string tail(s.substr(4));
      char* end = nullptr;
      const double q = std::strtod(tail.c_str(), &end);
      if (tail.empty() || end != tail.c_str() + tail.size())
        throw InvalidArgument("bad PTA probability in '" + std::string(s) + "'");
      return pta(q);
    }
    throw InvalidArgument("unknown algorithm '" + std::string(s) + "' (expected etdm, oa or pta:<q>)");
  }

  bool operator==(const Algorithm&) const = default;
};

struct RunOptions {
  bool contention = true;   // false: every link runs at its solo rate, planning too
  bool renormalize = false;
  std::optional<double> time_step_s;  // overrides the scenario's step
};

struct VehicleRecord {
  VehicleId id = 0;
  Branch branch = Branch::A;
  double demand_mb = 0.0;  // full demand
  double target_mb = 0.0;  // demand actually pursued (basic when degraded)
  double planned_time_s = 0.0;
  bool completed = false;  // full map delivered
  double delivered_mb = 0.0;
  double transmission_time_s = 0.0;
  std::vector<RsuId> rsus_used;
  bool degraded = false;
  bool stranded = false;
  bool energy_exhausted = false;
  bool capacity_shortfall = false;  // planner could not cover the target

  bool operator==(const VehicleRecord&) const = default;
};

struct RsuAccess {
  RsuId rsu_id = 0;
  int vehicles_served = 0;

  bool operator==(const RsuAccess&) const = default;
};

struct SimResult {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<VehicleRecord> vehicles;  // scenario order
  std::vector<RsuAccess> access;        // every RSU, ascending id

  bool operator==(const SimResult&) const = default;
};

// Seed for a vehicle's PTA engagement draws. Independent of q, so the
// engaged sets for q1 < q2 are nested.
inline std::uint64_t pta_seed(std::uint64_t scenario_seed, VehicleId id) {
  return Rng(scenario_seed, static_cast<std::uint64_t>(id) + 1).next();
}

class Simulation {
public:
  Simulation(const Scenario& s, Algorithm algorithm, RunOptions opts = {})
      : scenario_(s), algorithm_(algorithm), opts_(opts) {
    const auto violations = validate_scenario(s);
    if (!violations.empty())
      throw InvalidArgument("invalid scenario: " + violations.front().where + ": " +
                            violations.front().what);
    dt_ = opts.time_step_s.value_or(s.time_step_s);
    if (!(dt_ > 0)) throw InvalidArgument("time step must be > 0");
    for (std::size_t i = 0; i < s.rsus.size(); ++i) rsu_index_[s.rsus[i].id] = i;
    occupancy_.assign(s.rsus.size(), 0);
    served_.assign(s.rsus.size(), std::vector<bool>(s.vehicles.size(), false));
    plan_all();
  }

  double time_step() const { return dt_; }
  double now() const { return static_cast<double>(step_index_) * dt_; }
  double horizon() const { return horizon_; }
  bool finished() const { return now() >= horizon_; }

  // Engaged vehicles at the RSU during the most recent step.
  int occupancy(RsuId rsu) const {
    const auto it = rsu_index_.find(rsu);
    return it == rsu_index_.end() ? 0 : occupancy_[it->second];
  }

  // Per-link rate seen in the most recent step (0 when the link was idle).
  double last_rate(VehicleId vehicle, RsuId rsu) const {
    for (const auto& l : links_)
      if (scenario_.vehicles[l.vehicle].id == vehicle && scenario_.rsus[l.rsu].id == rsu)
        return l.last_rate;
    return 0.0;
  }

  const std::vector<VehicleRecord>& records() const { return records_; }

  void step() {
    const double t0 = now();
    const double t1 = t0 + dt_;
    std::fill(occupancy_.begin(), occupancy_.end(), 0);

    active_.clear();
    for (std::size_t li = 0; li < links_.size(); ++li) {
      Link& l = links_[li];
      l.last_rate = 0.0;
      if (l.start >= t1) break;  // links_ is sorted by start
      if (l.end <= t0 || state_[l.vehicle].done) continue;
      active_.push_back(li);
      ++occupancy_[l.rsu];
    }

    for (std::size_t li : active_) {
      Link& l = links_[li];
      VehicleState& vs = state_[l.vehicle];
      VehicleRecord& rec = records_[l.vehicle];
      if (vs.done) continue;
      const Rsu& rsu = scenario_.rsus[l.rsu];
      const int k = opts_.contention ? occupancy_[l.rsu] : 1;
      const double rate =
          channel::downlink_rate(channel::LinkContext{&rsu, rsu.lane_offset_m, k}, scenario_.channel);
      l.last_rate = rate;
      const double overlap = std::min(l.end, t1) - std::max(l.start, t0);
      if (overlap <= 0 || rate <= 0) continue;

      double use = overlap;
      const double need = rec.target_mb - rec.delivered_mb;
      use = std::min(use, need / rate);
      const double power = scenario_.energy.rx_power_w;
      use = std::min(use, vs.energy_j / power);
      use = std::max(use, 0.0);

      rec.delivered_mb += rate * use;
      rec.transmission_time_s += use;
      vs.energy_j -= power * use;
      if (use > 0) served_[l.rsu][l.vehicle] = true;

      if (rec.delivered_mb >= rec.target_mb * (1.0 - 1e-12)) {
        rec.delivered_mb = std::min(rec.delivered_mb, rec.target_mb);
        vs.done = true;
      } else if (vs.energy_j <= 0.0) {
        vs.energy_j = 0.0;
        rec.energy_exhausted = true;
        vs.done = true;
      }
    }
    ++step_index_;
  }

  SimResult run() {
    while (!finished()) step();
    return result();
  }

  SimResult result() const {
    SimResult out;
    out.algorithm = algorithm_.label();
    out.seed = scenario_.seed;
    out.vehicles = records_;
    for (std::size_t vi = 0; vi < out.vehicles.size(); ++vi) {
      VehicleRecord& rec = out.vehicles[vi];
      for (std::size_t ri = 0; ri < scenario_.rsus.size(); ++ri)
        if (served_[ri][vi]) rec.rsus_used.push_back(scenario_.rsus[ri].id);
      std::sort(rec.rsus_used.begin(), rec.rsus_used.end());
      rec.completed = !rec.stranded && !rec.degraded &&
                      rec.delivered_mb >= rec.demand_mb * (1.0 - 1e-9);
    }
    for (std::size_t ri = 0; ri < scenario_.rsus.size(); ++ri) {
      const auto n = std::count(served_[ri].begin(), served_[ri].end(), true);
      out.access.push_back({scenario_.rsus[ri].id, static_cast<int>(n)});
    }
    std::sort(out.access.begin(), out.access.end(),
              [](const RsuAccess& a, const RsuAccess& b) { return a.rsu_id < b.rsu_id; });
    return out;
  }

private:
  struct Link {
    std::size_t vehicle = 0;
    std::size_t rsu = 0;
    double start = 0.0;
    double end = 0.0;
    double last_rate = 0.0;
  };

  struct VehicleState {
    double energy_j = 0.0;
    bool done = false;
  };

  void plan_all() {
    const Scenario& s = scenario_;
    const scheduler::PlanningOptions popts{opts_.contention, opts_.renormalize, 1};
    records_.resize(s.vehicles.size());
    state_.resize(s.vehicles.size());

    for (std::size_t vi = 0; vi < s.vehicles.size(); ++vi) {
      const Vehicle& v = s.vehicles[vi];
      const auto offers = scheduler::offers_for(s, v, popts);
      scheduler::Allocator allocate;
      std::vector<bool> usable(offers.size(), true);
      switch (algorithm_.kind) {
        case AlgorithmKind::Etdm:
          allocate = [](double d, std::span<const scheduler::RsuOffer> o) {
            return scheduler::etdm_single(d, o);
          };
          break;
        case AlgorithmKind::Oa:
          allocate = [](double d, std::span<const scheduler::RsuOffer> o) {
            return scheduler::oa_allocate(d, o);
          };
          break;
        case AlgorithmKind::Pta: {
          const auto seed = pta_seed(s.seed, v.id);
          const double q = algorithm_.q;
          usable = scheduler::pta_engagement_mask(offers.size(), q, seed);
          allocate = [q, seed](double d, std::span<const scheduler::RsuOffer> o) {
            return scheduler::pta_allocate(d, o, q, seed);
          };
          break;
        }
      }
      const auto vp = scheduler::plan_vehicle(s, v, offers, allocate);

      VehicleRecord& rec = records_[vi];
      rec.id = v.id;
      rec.branch = v.branch;
      rec.demand_mb = v.demand.full_mb;
      rec.stranded = vp.verdict == energy::Verdict::Stranded;
      rec.degraded = vp.verdict == energy::Verdict::DegradeToBasic;
      rec.target_mb = rec.stranded ? 0.0 : (rec.degraded ? v.demand.basic_mb : v.demand.full_mb);
      rec.planned_time_s = vp.plan.total_time_s;
      rec.capacity_shortfall = vp.capacity_shortfall;

      VehicleState& vs = state_[vi];
      const double drive =
          energy::drive_energy(s.energy.drive_rate_kwh_per_km, v.route_length_km);
      vs.energy_j = std::max(0.0, energy::kwh_to_joules(v.energy_remaining_kwh - drive));
      vs.done = rec.stranded || rec.target_mb <= 0;
      if (vs.done) continue;

      // Chord crossing times for each RSU on the branch.
      for (std::size_t oi = 0; oi < offers.size(); ++oi) {
        const Rsu& rsu = s.rsus[rsu_index_.at(offers[oi].rsu_id)];
        const double half = rsu.half_chord_m();
        if (half <= 0) continue;
        const double enter = v.entry_time_s + (rsu.position_m - half) / v.speed_mps;
        const double exit = v.entry_time_s + (rsu.position_m + half) / v.speed_mps;
        Link l;
        l.vehicle = vi;
        l.rsu = rsu_index_.at(rsu.id);
        if (algorithm_.kind == AlgorithmKind::Etdm) {
          // Planned time centered on the chord midpoint.
          const auto it = std::find_if(vp.plan.entries.begin(), vp.plan.entries.end(),
                                       [&](const PlanEntry& e) { return e.rsu_id == rsu.id; });
          if (it == vp.plan.entries.end() || !it->engaged || it->time_s <= 0) continue;
          const double mid = 0.5 * (enter + exit);
          const double t = std::min(it->time_s, exit - enter);
          l.start = mid - 0.5 * t;
          l.end = mid + 0.5 * t;
        } else {
          if (!usable[oi]) continue;
          l.start = enter;
          l.end = exit;
        }
        links_.push_back(l);
      }
    }
    std::stable_sort(links_.begin(), links_.end(), [](const Link& a, const Link& b) {
      if (a.start != b.start) return a.start < b.start;
      if (a.vehicle != b.vehicle) return a.vehicle < b.vehicle;
      return a.rsu < b.rsu;
    });
    horizon_ = 0.0;
    for (const auto& l : links_) horizon_ = std::max(horizon_, l.end);
  }

  const Scenario& scenario_;
  Algorithm algorithm_;
  RunOptions opts_;
  double dt_ = 0.1;
  double horizon_ = 0.0;
  std::uint64_t step_index_ = 0;
  std::map<RsuId, std::size_t> rsu_index_;
  std::vector<Link> links_;
  std::vector<std::size_t> active_;
  std::vector<int> occupancy_;
  std::vector<std::vector<bool>> served_;
  std::vector<VehicleRecord> records_;
  std::vector<VehicleState> state_;
};

// Pure function of (scenario, algorithm, options).
inline SimResult run_scenario(const Scenario& s, Algorithm algorithm, RunOptions opts = {}) {
  Simulation sim(s, algorithm, opts);
  return sim.run();
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::ordered_json to_json(const SimResult& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = r.algorithm;
  j["seed"] = r.seed;
  j["vehicles"] = nlohmann::ordered_json::array();
  for (const auto& v : r.vehicles) {
    j["vehicles"].push_back({{"id", v.id},
                             {"branch", to_string(v.branch)},
                             {"demand_mb", v.demand_mb},
                             {"target_mb", v.target_mb},
                             {"completed", v.completed},
                             {"delivered_mb", v.delivered_mb},
                             {"transmission_time_s", v.transmission_time_s},
                             {"planned_time_s", v.planned_time_s},
                             {"rsus_used", v.rsus_used},
                             {"degraded", v.degraded},
                             {"stranded", v.stranded},
                             {"energy_exhausted", v.energy_exhausted},
                             {"capacity_shortfall", v.capacity_shortfall}});
  }
  j["rsu_access"] = nlohmann::ordered_json::array();
  for (const auto& a : r.access)
    j["rsu_access"].push_back({{"rsu_id", a.rsu_id}, {"vehicles_served", a.vehicles_served}});
  return j;
}

inline constexpr std::string_view kVehicleCsvHeader =
    "algorithm,seed,vehicle_id,branch,completed,degraded,stranded,delivered_mb,"
    "transmission_time_s,rsus_used";

// One row per vehicle; rsus_used is ';'-separated.
inline std::string vehicle_rows_csv(const SimResult& r) {
  std::string out;
  char buf[128];
  for (const auto& v : r.vehicles) {
    out += r.algorithm + ',' + std::to_string(r.seed) + ',' + std::to_string(v.id) + ',' +
           to_string(v.branch) + ',' + (v.completed ? "1" : "0") + ',' + (v.degraded ? "1" : "0") +
           ',' + (v.stranded ? "1" : "0");
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,", v.delivered_mb, v.transmission_time_s);
    out += buf;
    for (std::size_t i = 0; i < v.rsus_used.size(); ++i) {
      if (i) out += ';';
      out += std::to_string(v.rsus_used[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace hdmap::engine
