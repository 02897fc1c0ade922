#pragma once

#include "hdmap/error.hpp"
#include "hdmap/model.hpp"

namespace hdmap::energy {

class StalledLink : public Error {
public:
  StalledLink() : Error("rx_energy: link rate is zero") {}
};

// Ordered worst to best.
enum class Verdict { Stranded = 0, DegradeToBasic = 1, Feasible = 2 };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stranded: return "stranded";
    case Verdict::DegradeToBasic: return "degrade";
    case Verdict::Feasible: return "feasible";
  }
  return "?";
}

inline double drive_energy(double rate_kwh_per_km, double distance_km) {
  if (rate_kwh_per_km < 0 || distance_km < 0)
    throw InvalidArgument("drive_energy: inputs must be >= 0");
  return rate_kwh_per_km * distance_km;
}

// Receive power times air time, in joules.
inline double rx_energy(double data_mb, double rate_mb_s, double rx_power_w) {
  if (!(rate_mb_s > 0)) throw StalledLink();
  return rx_power_w * (data_mb / rate_mb_s);
}

inline double joules_to_kwh(double j) { return j / kJoulesPerKwh; }
inline double kwh_to_joules(double kwh) { return kwh * kJoulesPerKwh; }

// Budget check for one vehicle: driving its route plus receiving the full
// map must stay strictly below the remaining energy; otherwise fall back to
// the basic layers; a vehicle that cannot even drive its route is stranded.
// The basic transfer is attempted even if it too would overrun; the
// simulation's energy ledger cuts it off.
inline Verdict energy_feasible(const Vehicle& v, const EnergyParams& params,
                               double full_rx_joules) {
  const double drive = drive_energy(params.drive_rate_kwh_per_km, v.route_length_km);
  const double budget = v.energy_remaining_kwh;
  if (drive > budget) return Verdict::Stranded;
  if (drive + joules_to_kwh(full_rx_joules) < budget) return Verdict::Feasible;
  return Verdict::DegradeToBasic;
}

}  // namespace hdmap::energy
