#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace hdmap;
using engine::Algorithm;

namespace {

const std::vector<Algorithm> kFour{Algorithm::etdm(), Algorithm::oa(), Algorithm::pta(0.3),
                                   Algorithm::pta(0.7)};

Scenario small(std::size_t n, std::uint64_t seed = 3) {
  GeneratorParams p;
  p.vehicle_count = n;
  return generate_scenario(p, seed);
}

}  // namespace

TEST(Points, Grid) {
  EXPECT_EQ(sweep::sweep_points(140000, 300000, 10000).size(), 17u);
  EXPECT_EQ(sweep::sweep_points(5, 5, 1).size(), 1u);
  EXPECT_EQ(sweep::sweep_points(0.1, 0.3, 0.1).size(), 3u);
  EXPECT_THROW(sweep::sweep_points(1, 2, 0), InvalidArgument);
  EXPECT_THROW(sweep::sweep_points(3, 2, 1), InvalidArgument);
}

TEST(Volume, DefaultRangeGivesSeventeenPointsPerAlgorithm) {
  const auto rows = sweep::sweep_volume(small(6), {}, kFour);
  ASSERT_EQ(rows.size(), 17u * 4u);
  EXPECT_EQ(rows[0].algorithm, "etdm");
  EXPECT_EQ(rows[3].algorithm, "pta:0.7");
  EXPECT_EQ(rows[0].demand_mb, 140000.0);
  EXPECT_EQ(rows.back().demand_mb, 300000.0);
}

TEST(Volume, SinglePointGivesOneRowPerAlgorithm) {
  sweep::VolumeSweep cfg;
  cfg.from_mb = cfg.to_mb = 50000;
  EXPECT_EQ(sweep::sweep_volume(small(6), cfg, kFour).size(), 4u);
  EXPECT_THROW(sweep::sweep_volume(small(6), cfg, {}), InvalidArgument);
}

TEST(Volume, BudgetIsApplied) {
  const Scenario s = sweep::with_demand(small(5), 1234.0, 5.0);
  for (const auto& v : s.vehicles) {
    EXPECT_EQ(v.demand.full_mb, 1234.0);
    EXPECT_EQ(v.energy_remaining_kwh, 5.0);
    EXPECT_LE(v.demand.basic_mb, 1234.0);
  }
}

TEST(Traffic, DefaultCounts) {
  const Scenario base = small(251);
  std::vector<std::size_t> counts;
  for (std::size_t n = 10; n <= 250; n += 10) counts.push_back(sweep::with_vehicle_subset(base, n).vehicles.size());
  EXPECT_EQ(counts.size(), 25u);
  EXPECT_EQ(counts.front(), 10u);
  EXPECT_EQ(counts.back(), 250u);
}

TEST(Traffic, SubsetsAreNested) {
  const Scenario base = small(251);
  std::set<VehicleId> prev;
  for (std::size_t n = 10; n <= 250; n += 10) {
    std::set<VehicleId> ids;
    for (const auto& v : sweep::with_vehicle_subset(base, n).vehicles) ids.insert(v.id);
    EXPECT_TRUE(std::includes(ids.begin(), ids.end(), prev.begin(), prev.end()));
    prev = ids;
  }
  EXPECT_THROW(sweep::with_vehicle_subset(base, 252), InvalidArgument);
}

TEST(Traffic, SingleVehicleRows) {
  const auto rows = sweep::sweep_traffic(small(40), {1, 1, 1}, kFour);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_EQ(r.vehicles, 1u);
  EXPECT_THROW(sweep::sweep_traffic(small(40), {0, 5, 1}, kFour), InvalidArgument);
}

TEST(Determinism, ThreadsDoNotChangeTheCsv) {
  const Scenario base = small(60);
  sweep::VolumeSweep cfg;
  cfg.from_mb = 20000;
  cfg.to_mb = 80000;
  cfg.step_mb = 20000;
  const auto serial = sweep::to_csv(sweep::sweep_volume(base, cfg, kFour, {}, 1));
  EXPECT_EQ(serial, sweep::to_csv(sweep::sweep_volume(base, cfg, kFour, {}, 3)));
  EXPECT_EQ(serial, sweep::to_csv(sweep::sweep_volume(base, cfg, kFour, {}, 8)));
  const auto t1 = sweep::to_csv(sweep::sweep_traffic(base, {10, 60, 25}, kFour, {}, 1));
  EXPECT_EQ(t1, sweep::to_csv(sweep::sweep_traffic(base, {10, 60, 25}, kFour, {}, 4)));
}
