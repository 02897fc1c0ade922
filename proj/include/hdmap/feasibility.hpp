#pragma once

// Closed-form calculators for V2V map transfer: how long two vehicles stay in
// radio range, how much they can exchange, and how much driving it takes to
// collect a full map that way.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hdmap/error.hpp"

namespace hdmap::feasibility {

class UndefinedContact : public Error {
public:
  UndefinedContact() : Error("contact time undefined: relative speed is zero") {}
};

class InfiniteContact : public Error {
public:
  InfiniteContact() : Error("infinite contact: vehicles travel at the same speed") {}
};

class Infeasible : public Error {
public:
  Infeasible() : Error("transfer infeasible: participation probability is zero") {}
};

struct V2vQuery {
  double range_m = 100.0;
  double lateral_offset_m = 0.0;
  double speed1_mps = 0.0;
  double speed2_mps = 0.0;
  double rate_mb_s = 0.0;
  double total_data_mb = 0.0;
  double reverse_lane_count = 0.0;
  double observation_time_s = 0.0;
};

// Vehicles on opposite lanes: the chord of the range circle at the given
// lateral offset, traversed at the closing speed.
inline double contact_time_opposite(const V2vQuery& q) {
  const double closing = q.speed1_mps + q.speed2_mps;
  if (!(closing > 0)) throw UndefinedContact();
  const double r2 = q.range_m * q.range_m;
  const double d2 = q.lateral_offset_m * q.lateral_offset_m;
  if (d2 >= r2) return 0.0;
  return 2.0 * std::sqrt(r2 - d2) / closing;
}

// Vehicles in the same direction: the faster one sweeps the full diameter
// at the speed difference.
inline double contact_time_same_direction(const V2vQuery& q) {
  const double diff = std::abs(q.speed1_mps - q.speed2_mps);
  if (diff == 0.0) throw InfiniteContact();
  return 2.0 * q.range_m / diff;
}

inline double contact_capacity(double contact_time_s, double rate_mb_s) {
  if (contact_time_s < 0 || rate_mb_s < 0)
    throw InvalidArgument("contact_capacity: time and rate must be >= 0");
  return contact_time_s * rate_mb_s;
}

/// DSRC link rate B * log2(1 + D * Ps * |h| / N0).
inline double dsrc_rate(double bandwidth, double distance_factor, double tx_power,
                        double fading_gain, double noise_psd) {
  if (!(bandwidth > 0) || !(noise_psd > 0))
    throw InvalidArgument("dsrc_rate: bandwidth and noise must be > 0");
  return bandwidth * std::log2(1.0 + distance_factor * tx_power * std::abs(fading_gain) / noise_psd);
}

// Whole vehicles needed to carry `total_mb` at `capacity_mb` each.
inline std::uint64_t vehicles_needed(double total_mb, double capacity_mb) {
  if (!(capacity_mb > 0)) throw InvalidArgument("vehicles_needed: capacity must be > 0");
  if (total_mb <= 0) return 0;
  const double ratio = total_mb / capacity_mb;
  // Guard against ratios like 3.0000000000000004 from inexact division.
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-12 * std::max(1.0, nearest))
    return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(ratio));
}

// Probability an oncoming vehicle takes part, clamped to [0, 1].
inline double meeting_probability(double reverse_vehicles, double range_m, double speed_mps,
                                  double observation_time_s) {
  const double sweep = speed_mps * observation_time_s;
  if (!(sweep > 0)) throw InvalidArgument("meeting_probability: v * t must be > 0");
  return std::clamp(reverse_vehicles * range_m / sweep, 0.0, 1.0);
}

inline double v2v_distance_required(double vehicles, double speed_mps, double contact_time_s,
                                    double probability) {
  if (probability == 0.0) throw Infeasible();
  if (!(probability > 0)) throw InvalidArgument("v2v_distance_required: probability must be > 0");
  return vehicles * speed_mps * contact_time_s / probability;
}

}  // namespace hdmap::feasibility
