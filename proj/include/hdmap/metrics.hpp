#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdmap/engine.hpp"

namespace hdmap::metrics {

// Population variance of per-RSU hit shares (count_i / total), zero-count
// RSUs included. Undefined (nullopt) when nothing was accessed.
inline std::optional<double> hit_rate_variance(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (counts.empty() || !(total > 0)) return std::nullopt;
  const double n = static_cast<double>(counts.size());
  const double mean = 1.0 / n;  // shares sum to one
  double acc = 0.0;
  for (double c : counts) {
    const double d = c / total - mean;
    acc += d * d;
  }
  return acc / n;
}

struct MetricsReport {
  bool empty = true;  // no results were summarized
  std::string algorithm;
  std::uint64_t seed = 0;
  std::size_t vehicles = 0;
  double demand_mb = 0.0;  // mean full demand

  // Over completed vehicles; nullopt when none completed.
  std::optional<double> makespan_s;
  std::optional<double> min_time_s;
  std::optional<double> mean_time_s;
  std::vector<double> completed_times_s;

  // Over vehicles that received any data.
  std::optional<double> mean_rsus_per_vehicle;
  std::map<std::size_t, std::size_t> rsus_per_vehicle_histogram;

  std::map<RsuId, int> access_counts;
  std::optional<double> hit_rate_variance;

  std::size_t completed = 0;
  std::size_t degraded = 0;
  std::size_t stranded = 0;
  double delivered_mb = 0.0;
};

// Pools the vehicles of every result; access counts add up per RSU id.
inline MetricsReport summarize(const std::vector<engine::SimResult>& results) {
  MetricsReport rep;
  if (results.empty()) return rep;
  rep.empty = false;
  rep.algorithm = results.front().algorithm;
  rep.seed = results.front().seed;

  double demand_sum = 0.0;
  double rsus_sum = 0.0;
  std::size_t served = 0;
  for (const auto& r : results) {
    for (const auto& a : r.access) rep.access_counts[a.rsu_id] += a.vehicles_served;
    for (const auto& v : r.vehicles) {
      ++rep.vehicles;
      demand_sum += v.demand_mb;
      rep.delivered_mb += v.delivered_mb;
      if (v.completed) {
        ++rep.completed;
        rep.completed_times_s.push_back(v.transmission_time_s);
      }
      if (v.degraded) ++rep.degraded;
      if (v.stranded) ++rep.stranded;
      if (v.delivered_mb > 0) {
        ++served;
        rsus_sum += static_cast<double>(v.rsus_used.size());
        ++rep.rsus_per_vehicle_histogram[v.rsus_used.size()];
      }
    }
  }
  if (rep.vehicles > 0) rep.demand_mb = demand_sum / static_cast<double>(rep.vehicles);
  if (!rep.completed_times_s.empty()) {
    const auto& t = rep.completed_times_s;
    rep.makespan_s = *std::max_element(t.begin(), t.end());
    rep.min_time_s = *std::min_element(t.begin(), t.end());
    double sum = 0.0;
    for (double x : t) sum += x;
    rep.mean_time_s = sum / static_cast<double>(t.size());
  }
  if (served > 0) rep.mean_rsus_per_vehicle = rsus_sum / static_cast<double>(served);

  std::vector<double> counts;
  for (const auto& [id, c] : rep.access_counts) counts.push_back(static_cast<double>(c));
  rep.hit_rate_variance = hit_rate_variance(counts);
  return rep;
}

inline MetricsReport summarize(const engine::SimResult& result) {
  return summarize(std::vector<engine::SimResult>{result});
}

inline constexpr std::string_view kReportCsvHeader =
    "algorithm,seed,vehicles,demand_mb,makespan_s,min_time_s,mean_time_s,mean_rsus_per_vehicle,"
    "hit_rate_variance,completed,degraded,stranded,delivered_mb";

namespace detail {

inline std::string fmt(std::optional<double> x, const char* spec = "%.6f") {
  if (!x) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, *x);
  return buf;
}

}  // namespace detail

// Undefined statistics print as NA.
inline std::string report_csv_row(const MetricsReport& r) {
  using detail::fmt;
  std::string out = r.algorithm + ',' + std::to_string(r.seed) + ',' + std::to_string(r.vehicles) +
                    ',' + fmt(r.demand_mb) + ',' + fmt(r.makespan_s) + ',' + fmt(r.min_time_s) +
                    ',' + fmt(r.mean_time_s) + ',' + fmt(r.mean_rsus_per_vehicle) + ',' +
                    fmt(r.hit_rate_variance, "%.9g") + ',' + std::to_string(r.completed) + ',' +
                    std::to_string(r.degraded) + ',' + std::to_string(r.stranded) + ',' +
                    fmt(r.delivered_mb);
  return out + '\n';
}

}  // namespace hdmap::metrics
