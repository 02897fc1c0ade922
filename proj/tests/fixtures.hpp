#pragma once

#include <vector>

#include "hdmap/hdmap.hpp"

namespace fixtures {

inline hdmap::Rsu rsu(hdmap::RsuId id, hdmap::Branch b, double position, double offset = 30.0,
                      double bandwidth = 1500.0, double power = 20.0, double radius = 100.0) {
  return {id, b, position, offset, radius, bandwidth, power};
}

inline hdmap::Vehicle vehicle(hdmap::VehicleId id, hdmap::Branch b, double entry, double speed = 20.0,
                              double demand = 1000.0, double energy = 5.0, double route_km = 10.0) {
  hdmap::Vehicle v;
  v.id = id;
  v.branch = b;
  v.entry_time_s = entry;
  v.speed_mps = speed;
  v.energy_remaining_kwh = energy;
  v.route_length_km = route_km;
  v.demand = {demand, std::min(demand, 100.0)};
  return v;
}

// A short branch A with `n` RSUs 200 m apart and no vehicles.
inline hdmap::Scenario corridor(int n, std::uint64_t seed = 7) {
  hdmap::Scenario s;
  s.seed = seed;
  s.channel.fading_gain = 60.0;
  s.energy.drive_rate_kwh_per_km = 0.2;
  for (int i = 0; i < n; ++i)
    s.rsus.push_back(rsu(i, hdmap::Branch::A, 100.0 + 200.0 * i, 25.0 + 5.0 * (i % 5),
                         1000.0 + 100.0 * i));
  return s;
}

}  // namespace fixtures
