#pragma once

// Parameter sweeps over a base scenario. Points run in parallel; rows come
// back ordered by (sweep value, algorithm position) whatever the completion
// order.

#include <cmath>
#include <string>
#include <vector>

#include "hdmap/engine.hpp"
#include "hdmap/metrics.hpp"
#include "hdmap/parallel.hpp"

namespace hdmap::sweep {

inline std::vector<double> sweep_points(double from, double to, double step) {
  if (!(step > 0)) throw InvalidArgument("sweep step must be > 0");
  if (!(from <= to)) throw InvalidArgument("sweep range must satisfy from <= to");
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = from + static_cast<double>(i) * step;
  return out;
}

struct VolumeSweep {
  double from_mb = 140000.0;
  double to_mb = 300000.0;
  double step_mb = 10000.0;
  double budget_kwh = 5.0;
};

// Every vehicle gets the same full demand and the same energy budget.
inline Scenario with_demand(const Scenario& base, double demand_mb, double budget_kwh) {
  Scenario s = base;
  for (auto& v : s.vehicles) {
    v.demand.full_mb = demand_mb;
    v.demand.basic_mb = std::min(v.demand.basic_mb, demand_mb);
    v.energy_remaining_kwh = budget_kwh;
  }
  return s;
}

// The first n vehicles of a seed-determined permutation, kept in scenario
// order. Subsets are nested: a larger n contains every smaller one.
inline Scenario with_vehicle_subset(const Scenario& base, std::size_t n) {
  if (n > base.vehicles.size())
    throw InvalidArgument("traffic sweep: " + std::to_string(n) + " vehicles requested, scenario has " +
                          std::to_string(base.vehicles.size()));
  std::vector<std::size_t> order(base.vehicles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(base.seed, 0x7AFF1CULL);
  rng.shuffle(order);
  order.resize(n);
  std::sort(order.begin(), order.end());
  Scenario s = base;
  s.vehicles.clear();
  for (std::size_t i : order) s.vehicles.push_back(base.vehicles[i]);
  return s;
}

namespace detail {

inline std::vector<metrics::MetricsReport> run_grid(const std::vector<Scenario>& points,
                                                    const std::vector<engine::Algorithm>& algorithms,
                                                    const engine::RunOptions& opts,
                                                    std::size_t threads) {
  if (algorithms.empty()) throw InvalidArgument("sweep: algorithm list is empty");
  std::vector<metrics::MetricsReport> rows(points.size() * algorithms.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const Scenario& s = points[i / algorithms.size()];
    const auto& algo = algorithms[i % algorithms.size()];
    rows[i] = metrics::summarize(engine::run_scenario(s, algo, opts));
  });
  return rows;
}

}  // namespace detail

inline std::vector<metrics::MetricsReport> sweep_volume(const Scenario& base, const VolumeSweep& cfg,
                                                        const std::vector<engine::Algorithm>& algorithms,
                                                        const engine::RunOptions& opts = {},
                                                        std::size_t threads = 1) {
  if (!(cfg.from_mb > 0)) throw InvalidArgument("volume sweep: demand must be > 0");
  std::vector<Scenario> points;
  for (double d : sweep_points(cfg.from_mb, cfg.to_mb, cfg.step_mb))
    points.push_back(with_demand(base, d, cfg.budget_kwh));
  return detail::run_grid(points, algorithms, opts, threads);
}

struct TrafficSweep {
  std::size_t from_n = 10;
  std::size_t to_n = 250;
  std::size_t step_n = 10;
};

inline std::vector<metrics::MetricsReport> sweep_traffic(const Scenario& base, const TrafficSweep& cfg,
                                                         const std::vector<engine::Algorithm>& algorithms,
                                                         const engine::RunOptions& opts = {},
                                                         std::size_t threads = 1) {
  if (cfg.from_n < 1) throw InvalidArgument("traffic sweep: from must be >= 1");
  if (cfg.step_n < 1) throw InvalidArgument("traffic sweep: step must be >= 1");
  if (cfg.from_n > cfg.to_n) throw InvalidArgument("traffic sweep: from must be <= to");
  std::vector<Scenario> points;
  for (std::size_t n = cfg.from_n; n <= cfg.to_n; n += cfg.step_n)
    points.push_back(with_vehicle_subset(base, n));
  return detail::run_grid(points, algorithms, opts, threads);
}

inline std::string to_csv(const std::vector<metrics::MetricsReport>& rows, bool header = true) {
  std::string out;
  if (header) {
    out += metrics::kReportCsvHeader;
    out += '\n';
  }
  for (const auto& r : rows) out += metrics::report_csv_row(r);
  return out;
}

}  // namespace hdmap::sweep
