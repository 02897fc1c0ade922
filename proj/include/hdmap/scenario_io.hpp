#pragma once

// JSON scenario documents. Field names mirror the Scenario struct; the seed
// is embedded so a file fully determines every downstream run.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hdmap/error.hpp"
#include "hdmap/model.hpp"

namespace hdmap {

inline nlohmann::ordered_json to_json(const Scenario& s) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["seed"] = s.seed;
  j["time_step_s"] = s.time_step_s;
  j["meeting_probability"] = s.meeting_probability;
  j["channel"] = {{"path_loss_exponent", s.channel.path_loss_exponent},
                  {"fading_gain", s.channel.fading_gain},
                  {"noise_psd", s.channel.noise_psd},
                  {"rx_bandwidth_default", s.channel.rx_bandwidth_default}};
  j["energy"] = {{"drive_rate_kwh_per_km", s.energy.drive_rate_kwh_per_km},
                 {"rx_power_w", s.energy.rx_power_w}};
  j["rsus"] = ordered_json::array();
  for (const auto& r : s.rsus) {
    j["rsus"].push_back({{"id", r.id},
                         {"branch", to_string(r.branch)},
                         {"position_m", r.position_m},
                         {"lane_offset_m", r.lane_offset_m},
                         {"coverage_radius_m", r.coverage_radius_m},
                         {"bandwidth_mb_s", r.bandwidth_mb_s},
                         {"tx_power_max_w", r.tx_power_max_w}});
  }
  j["vehicles"] = ordered_json::array();
  for (const auto& v : s.vehicles) {
    j["vehicles"].push_back({{"id", v.id},
                             {"branch", to_string(v.branch)},
                             {"entry_time_s", v.entry_time_s},
                             {"speed_mps", v.speed_mps},
                             {"energy_remaining_kwh", v.energy_remaining_kwh},
                             {"route_length_km", v.route_length_km},
                             {"demand", {{"full_mb", v.demand.full_mb}, {"basic_mb", v.demand.basic_mb}}}});
  }
  return j;
}

namespace detail {

inline Branch branch_from_json(const nlohmann::ordered_json& j, const std::string& where) {
  const auto label = j.get<std::string>();
  const auto b = parse_branch(label);
  if (!b) throw InvalidArgument(where + ": unknown branch '" + label + "'");
  return *b;
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::ordered_json& j) {
  Scenario s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.time_step_s = j.at("time_step_s").get<double>();
    s.meeting_probability = j.at("meeting_probability").get<double>();
    const auto& c = j.at("channel");
    s.channel.path_loss_exponent = c.at("path_loss_exponent").get<double>();
    s.channel.fading_gain = c.at("fading_gain").get<double>();
    s.channel.noise_psd = c.at("noise_psd").get<double>();
    s.channel.rx_bandwidth_default = c.at("rx_bandwidth_default").get<double>();
    const auto& e = j.at("energy");
    s.energy.drive_rate_kwh_per_km = e.at("drive_rate_kwh_per_km").get<double>();
    s.energy.rx_power_w = e.at("rx_power_w").get<double>();
    for (const auto& r : j.at("rsus")) {
      Rsu x;
      x.id = r.at("id").get<RsuId>();
      x.branch = detail::branch_from_json(r.at("branch"), "rsu " + std::to_string(x.id));
      x.position_m = r.at("position_m").get<double>();
      x.lane_offset_m = r.at("lane_offset_m").get<double>();
      x.coverage_radius_m = r.at("coverage_radius_m").get<double>();
      x.bandwidth_mb_s = r.at("bandwidth_mb_s").get<double>();
      x.tx_power_max_w = r.at("tx_power_max_w").get<double>();
      s.rsus.push_back(x);
    }
    for (const auto& v : j.at("vehicles")) {
      Vehicle x;
      x.id = v.at("id").get<VehicleId>();
      x.branch = detail::branch_from_json(v.at("branch"), "vehicle " + std::to_string(x.id));
      x.entry_time_s = v.at("entry_time_s").get<double>();
      x.speed_mps = v.at("speed_mps").get<double>();
      x.energy_remaining_kwh = v.at("energy_remaining_kwh").get<double>();
      x.route_length_km = v.at("route_length_km").get<double>();
      x.demand.full_mb = v.at("demand").at("full_mb").get<double>();
      x.demand.basic_mb = v.at("demand").at("basic_mb").get<double>();
      s.vehicles.push_back(x);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("scenario document: ") + ex.what());
  }
  return s;
}

inline std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

inline Scenario load_scenario_text(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw InvalidArgument(std::string("scenario document: ") + ex.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str());
}

inline void save_scenario_file(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write scenario file '" + path + "'");
  out << dump_scenario(s);
}

}  // namespace hdmap
