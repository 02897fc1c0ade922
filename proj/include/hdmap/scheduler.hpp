#pragma once

// Per-vehicle transfer allocation across the RSUs a vehicle will pass.
//
// ETDM treats each vehicle as a fractional knapsack: RSUs are ranked by
// contention-weighted rate, whole contact windows are consumed from the top
// of the ranking and the last engaged RSU carries the fractional residue.
// OA and PTA are the first-come baselines. oracle_min_time is an exhaustive
// grid search that shares no code with the greedy path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hdmap/channel.hpp"
#include "hdmap/energy.hpp"
#include "hdmap/error.hpp"
#include "hdmap/model.hpp"
#include "hdmap/parallel.hpp"
#include "hdmap/random.hpp"

namespace hdmap::scheduler {

struct RsuOffer {
  RsuId rsu_id = 0;
  double expected_rate_mb_s = 0.0;
  double window_s = 0.0;
};

/// Thrown when the offers cannot carry the demand. The plan that delivers
/// the maximum possible amount travels with the error.
class InsufficientCapacity : public Error {
public:
  explicit InsufficientCapacity(AllocationPlan partial)
      : Error("insufficient capacity: at most " + std::to_string(partial.delivered_mb) +
              " MB deliverable"),
        plan_(std::move(partial)) {}

  double max_deliverable_mb() const noexcept { return plan_.delivered_mb; }
  const AllocationPlan& partial_plan() const noexcept { return plan_; }

private:
  AllocationPlan plan_;
};

struct EtdmStats {
  std::size_t comparisons = 0;
  std::size_t passes = 0;  // linear passes over the sorted offers
};

namespace detail {

inline void check_offers(std::span<const RsuOffer> offers) {
  for (const auto& o : offers) {
    if (!(o.expected_rate_mb_s >= 0) || !(o.window_s >= 0) || !std::isfinite(o.expected_rate_mb_s) ||
        !std::isfinite(o.window_s))
      throw InvalidArgument("offer for RSU " + std::to_string(o.rsu_id) +
                            ": rate and window must be finite and >= 0");
  }
}

// Fills delivered/total/fraction fields from the per-entry times.
inline AllocationPlan finish(AllocationPlan plan) {
  plan.delivered_mb = 0.0;
  plan.total_time_s = 0.0;
  for (auto& e : plan.entries) {
    if (!e.engaged) e.time_s = e.data_mb = 0.0;
    plan.delivered_mb += e.data_mb;
    plan.total_time_s += e.time_s;
  }
  for (auto& e : plan.entries)
    e.fraction = plan.delivered_mb > 0 ? e.data_mb / plan.delivered_mb : 0.0;
  return plan;
}

// Relative slack when comparing cumulative capacity against demand.
inline constexpr double kCapacityEps = 1e-12;

// Walks offers in the given order, filling whole windows until the residue
// fits. `usable[i] == false` skips an offer.
inline AllocationPlan fill_in_order(double demand_mb, std::span<const RsuOffer> offers,
                                    const std::vector<bool>& usable) {
  AllocationPlan plan;
  plan.demand_mb = demand_mb;
  double remaining = demand_mb;
  for (std::size_t i = 0; i < offers.size(); ++i) {
    const RsuOffer& o = offers[i];
    PlanEntry e;
    e.rsu_id = o.rsu_id;
    const double capacity = o.expected_rate_mb_s * o.window_s;
    if (usable[i] && remaining > demand_mb * kCapacityEps && capacity > 0) {
      e.engaged = true;
      if (capacity >= remaining * (1.0 - kCapacityEps)) {
        e.time_s = std::min(o.window_s, remaining / o.expected_rate_mb_s);
        e.data_mb = remaining;
        remaining = 0.0;
      } else {
        e.time_s = o.window_s;
        e.data_mb = capacity;
        remaining -= capacity;
      }
    }
    plan.entries.push_back(e);
  }
  plan = finish(std::move(plan));
  if (remaining > demand_mb * kCapacityEps) throw InsufficientCapacity(std::move(plan));
  return plan;
}

}  // namespace detail

// Greedy fractional-knapsack allocation. Entries come back in rank order
// (rate descending, ties by ascending RSU id).
inline AllocationPlan etdm_single(double demand_mb, std::span<const RsuOffer> offers,
                                  EtdmStats* stats = nullptr) {
  if (!(demand_mb > 0)) throw InvalidArgument("etdm_single: demand must be > 0");
  detail::check_offers(offers);
  std::vector<std::size_t> order(offers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t comparisons = 0;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    ++comparisons;
    const RsuOffer& x = offers[a];
    const RsuOffer& y = offers[b];
    if (x.expected_rate_mb_s != y.expected_rate_mb_s)
      return x.expected_rate_mb_s > y.expected_rate_mb_s;
    if (x.rsu_id != y.rsu_id) return x.rsu_id < y.rsu_id;
    return a < b;
  });
  std::vector<RsuOffer> ranked;
  ranked.reserve(offers.size());
  for (std::size_t i : order) ranked.push_back(offers[i]);
  if (stats) {
    stats->comparisons = comparisons;
    stats->passes = 1;
  }
  return detail::fill_in_order(demand_mb, ranked, std::vector<bool>(ranked.size(), true));
}

// First-come baseline: every encountered RSU in order until the demand is met.
inline AllocationPlan oa_allocate(double demand_mb, std::span<const RsuOffer> encounters) {
  if (!(demand_mb > 0)) throw InvalidArgument("oa_allocate: demand must be > 0");
  detail::check_offers(encounters);
  return detail::fill_in_order(demand_mb, encounters, std::vector<bool>(encounters.size(), true));
}

// Independent per-encounter engagement draws with probability q.
inline std::vector<bool> pta_engagement_mask(std::size_t encounters, double q, std::uint64_t seed) {
  if (!(q >= 0 && q <= 1)) throw InvalidArgument("pta: engage probability must be in [0, 1]");
  Rng rng(seed);
  std::vector<bool> mask(encounters);
  for (std::size_t i = 0; i < encounters; ++i) mask[i] = rng.bernoulli(q);
  return mask;
}

inline AllocationPlan pta_allocate(double demand_mb, std::span<const RsuOffer> encounters, double q,
                                   std::uint64_t rng_seed) {
  if (!(demand_mb > 0)) throw InvalidArgument("pta_allocate: demand must be > 0");
  detail::check_offers(encounters);
  return detail::fill_in_order(demand_mb, encounters,
                               pta_engagement_mask(encounters.size(), q, rng_seed));
}

struct OracleResult {
  double min_time_s = 0.0;
  double error_bound_s = 0.0;  // oracle lies in [optimum, optimum + error_bound]
  std::vector<double> times_s;  // the allocation achieving min_time_s, input order
};

// Exhaustive search over per-offer times on a grid of `resolution_s`: for
// every total number of grid units, the best achievable data over all ways of
// distributing those units (dynamic program over offers), then the smallest
// total that covers the demand. A window that is not a grid multiple may also
// be used in full.
inline OracleResult oracle_min_time(double demand_mb, std::span<const RsuOffer> offers,
                                    double resolution_s = 0.1) {
  if (offers.size() > 8) throw InvalidArgument("oracle_min_time: at most 8 offers");
  if (!(resolution_s > 0)) throw InvalidArgument("oracle_min_time: resolution must be > 0");
  detail::check_offers(offers);
  const std::size_t n = offers.size();
  OracleResult result;
  result.error_bound_s = resolution_s * static_cast<double>(n);
  result.times_s.assign(n, 0.0);
  if (demand_mb <= 0) return result;

  std::vector<std::size_t> units(n);
  std::size_t total_units = 0;
  for (std::size_t i = 0; i < n; ++i) {
    units[i] = static_cast<std::size_t>(std::ceil(offers[i].window_s / resolution_s - 1e-9));
    total_units += units[i];
  }
  auto time_of = [&](std::size_t i, std::size_t g) {
    return std::min(static_cast<double>(g) * resolution_s, offers[i].window_s);
  };

  constexpr double kNone = -1.0;
  // best[i][u]: most data using offers [0, i) with exactly u grid units.
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(total_units + 1, kNone));
  std::vector<std::vector<std::size_t>> choice(n + 1, std::vector<std::size_t>(total_units + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t u = 0; u <= total_units; ++u) {
      if (best[i][u] == kNone) continue;
      for (std::size_t g = 0; g <= units[i] && u + g <= total_units; ++g) {
        const double data = best[i][u] + offers[i].expected_rate_mb_s * time_of(i, g);
        if (data > best[i + 1][u + g]) {
          best[i + 1][u + g] = data;
          choice[i + 1][u + g] = g;
        }
      }
    }
  }

  for (std::size_t u = 0; u <= total_units; ++u) {
    if (best[n][u] == kNone || best[n][u] < demand_mb * (1.0 - detail::kCapacityEps)) continue;
    std::size_t left = u;
    double total = 0.0;
    for (std::size_t i = n; i > 0; --i) {
      const std::size_t g = choice[i][left];
      result.times_s[i - 1] = time_of(i - 1, g);
      total += result.times_s[i - 1];
      left -= g;
    }
    result.min_time_s = total;
    return result;
  }

  // Infeasible: report the full-window plan as the partial allocation.
  AllocationPlan partial;
  partial.demand_mb = demand_mb;
  for (const auto& o : offers)
    partial.entries.push_back({o.rsu_id, o.window_s > 0 && o.expected_rate_mb_s > 0, o.window_s,
                               o.expected_rate_mb_s * o.window_s, 0.0});
  throw InsufficientCapacity(detail::finish(std::move(partial)));
}

// ---------------------------------------------------------------------------
// Scenario-level planning

struct PlanningOptions {
  bool contention = true;   // false: plan with solo rates (k = 1)
  bool renormalize = false; // see channel::ExpectedRateOptions
  std::size_t threads = 1;
};

// Offers for every RSU on the vehicle's branch, in encounter order.
inline std::vector<RsuOffer> offers_for(const Scenario& s, const Vehicle& v,
                                        const PlanningOptions& opts = {}) {
  std::vector<RsuOffer> out;
  const int m = opts.contention ? static_cast<int>(std::max<std::size_t>(1, s.vehicles.size())) : 1;
  for (const Rsu* r : s.rsus_on(v.branch)) {
    RsuOffer o;
    o.rsu_id = r->id;
    o.window_s = channel::contact_window(*r, v);
    if (o.window_s > 0) {
      const channel::LinkContext ctx{r, r->lane_offset_m, 1};
      o.expected_rate_mb_s =
          channel::expected_rate(ctx, s.channel, m, s.meeting_probability, {opts.renormalize});
    }
    out.push_back(o);
  }
  return out;
}

struct VehiclePlan {
  VehicleId vehicle_id = -1;
  energy::Verdict verdict = energy::Verdict::Feasible;
  AllocationPlan plan;           // empty for stranded vehicles
  bool capacity_shortfall = false;
};

struct MultiPlan {
  std::vector<VehiclePlan> vehicles;  // scenario order
  double makespan_s = 0.0;
};

using Allocator = std::function<AllocationPlan(double demand_mb, std::span<const RsuOffer>)>;

// Energy gate followed by allocation. Shortfalls keep the partial plan.
inline VehiclePlan plan_vehicle(const Scenario& s, const Vehicle& v,
                                std::span<const RsuOffer> offers, const Allocator& allocate) {
  VehiclePlan out;
  out.vehicle_id = v.id;
  auto run = [&](double demand, bool& shortfall) {
    try {
      shortfall = false;
      return allocate(demand, offers);
    } catch (const InsufficientCapacity& e) {
      shortfall = true;
      return e.partial_plan();
    }
  };

  bool shortfall = false;
  AllocationPlan full = run(v.demand.full_mb, shortfall);
  double rx_joules = 0.0;
  for (std::size_t i = 0; i < full.entries.size(); ++i) {
    const PlanEntry& e = full.entries[i];
    if (!e.engaged || e.data_mb <= 0) continue;
    const auto it = std::find_if(offers.begin(), offers.end(),
                                 [&](const RsuOffer& o) { return o.rsu_id == e.rsu_id; });
    rx_joules += energy::rx_energy(e.data_mb, it->expected_rate_mb_s, s.energy.rx_power_w);
  }
  out.verdict = energy::energy_feasible(v, s.energy, rx_joules);
  switch (out.verdict) {
    case energy::Verdict::Stranded:
      out.plan = AllocationPlan{};
      out.plan.demand_mb = 0.0;
      break;
    case energy::Verdict::Feasible:
      out.plan = std::move(full);
      out.capacity_shortfall = shortfall;
      break;
    case energy::Verdict::DegradeToBasic:
      out.plan = run(v.demand.basic_mb, shortfall);
      out.plan.degraded = true;
      out.capacity_shortfall = shortfall;
      break;
  }
  out.plan.vehicle_id = v.id;
  return out;
}

// Plans every vehicle independently; the makespan is the largest planned
// total transfer time.
inline MultiPlan etdm_multi(const Scenario& s, const PlanningOptions& opts = {}) {
  MultiPlan out;
  out.vehicles.resize(s.vehicles.size());
  const Allocator etdm = [](double d, std::span<const RsuOffer> o) { return etdm_single(d, o); };
  parallel_for(s.vehicles.size(), opts.threads, [&](std::size_t i) {
    const Vehicle& v = s.vehicles[i];
    const auto offers = offers_for(s, v, opts);
    out.vehicles[i] = plan_vehicle(s, v, offers, etdm);
  });
  for (const auto& vp : out.vehicles) out.makespan_s = std::max(out.makespan_s, vp.plan.total_time_s);
  return out;
}

}  // namespace hdmap::scheduler
