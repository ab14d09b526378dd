#include <doctest.h>

#include <random>

#include "dsse/partition.hpp"
#include "dsse/powerflow.hpp"
#include "test_support.hpp"

using namespace dsse;

namespace {

RegionAssignment two_regions() { return {{1, {1}}, {2, {2}}}; }

// Every region's power flow residual at its original nodes.
DenseVector original_residuals(const Partition& partition, const RegionStates& z) {
  std::vector<double> out;
  for (Index r = 0; r < partition.region_count(); ++r) {
    const auto& region = partition.regions[r];
    const DenseVector res = power_flow_residual(z[r], build_admittance(region.fragment));
    for (int bus : region.original_nodes) {
      const Index k = region.local_index(bus);
      out.push_back(res(2 * k));
      out.push_back(res(2 * k + 1));
    }
  }
  return Eigen::Map<DenseVector>(out.data(), static_cast<Index>(out.size()));
}

}  // namespace

TEST_CASE("single region partition") {
  const GridCase grid = test::bundled_case("case9");
  const Partition partition = partition_grid(grid, single_region(grid));
  REQUIRE(partition.region_count() == 1);
  CHECK(partition.aux_pairs.empty());
  const auto coupling = build_coupling(partition);
  CHECK(coupling[0].rows() == 0);
  CHECK(coupling[0].cols() == 4 * grid.size());
  CHECK(partition.regions[0].fragment.buses == grid.buses);
  CHECK(partition.regions[0].fragment.lines == grid.lines);
  CHECK(merge_check(partition, grid));
}

TEST_CASE("two buses in two regions") {
  const GridCase grid = test::two_bus_case();
  const Partition partition = partition_grid(grid, two_regions());
  REQUIRE(partition.aux_pairs.size() == 1);
  for (const auto& region : partition.regions) {
    REQUIRE(region.aux_nodes.size() == 1);
    REQUIRE(region.fragment.lines.size() == 1);
    CHECK(region.fragment.lines[0].g == 2.0);
    CHECK(region.fragment.lines[0].b == -10.0);
    CHECK(region.internal_lines.empty());
  }
  CHECK(merge_check(partition, grid));
}

TEST_CASE("30-bus default partition has eight pairs") {
  const GridCase grid = test::bundled_case("ieee30");
  const Partition partition = partition_grid(grid, test::bundled_partition("ieee30_default4"));
  CHECK(partition.region_count() == 4);
  CHECK(partition.aux_pairs.size() == 8);
  const auto coupling = build_coupling(partition);
  std::size_t nodes = 0;
  for (Index r = 0; r < partition.region_count(); ++r) {
    CHECK(coupling[r].rows() == 16);
    CHECK(coupling[r].cols() == partition.regions[r].dimension());
    nodes += partition.regions[r].original_nodes.size();
  }
  CHECK(nodes == grid.buses.size());
  CHECK(merge_check(partition, grid));

  // Every coupling row has one +1 and one -1, only in theta or v columns.
  for (Index row = 0; row < partition.coupling_rows(); ++row) {
    int plus = 0, minus = 0;
    for (Index r = 0; r < partition.region_count(); ++r) {
      for (Index c = 0; c < coupling[r].cols(); ++c) {
        const double a = coupling[r](row, c);
        if (a == 0.0) continue;
        CHECK((c % 4 == kTheta || c % 4 == kVoltage));
        plus += a == 1.0;
        minus += a == -1.0;
      }
    }
    CHECK(plus == 1);
    CHECK(minus == 1);
  }
}

TEST_CASE("coupling residual detects a single perturbation") {
  const GridCase grid = test::bundled_case("ieee30");
  const Partition partition = partition_grid(grid, test::bundled_partition("ieee30_default4"));
  const auto coupling = build_coupling(partition);
  const DenseVector truth = solve_power_flow(grid).state;
  RegionStates z = restrict_to_regions(partition, grid, truth);
  CHECK(coupling_residual(coupling, z).cwiseAbs().maxCoeff() == 0.0);

  const auto& pair = partition.aux_pairs[3];
  const Index k = partition.regions[pair.region_k].local_index(pair.aux_k);
  z[pair.region_k](state_index(k, kTheta)) += 0.1;
  const DenseVector s = coupling_residual(coupling, z);
  CHECK(s.cwiseAbs().maxCoeff() == doctest::Approx(0.1));
  CHECK((s.array().abs() > 0.0).count() == 1);
  CHECK(std::abs(s(6)) == doctest::Approx(0.1));
}

TEST_CASE("consensus kernel under random perturbations") {
  const GridCase grid = test::bundled_case("ieee30");
  const Partition partition = partition_grid(grid, test::bundled_partition("ieee30_default4"));
  const auto coupling = build_coupling(partition);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    RegionStates z;
    for (const auto& region : partition.regions) {
      z.push_back(test::random_state(rng, region.node_count()));
    }
    // Match every pair, then break a random subset.
    std::vector<bool> broken(partition.aux_pairs.size());
    for (std::size_t t = 0; t < partition.aux_pairs.size(); ++t) {
      const auto& pair = partition.aux_pairs[t];
      const Index k = partition.regions[pair.region_k].local_index(pair.aux_k);
      const Index l = partition.regions[pair.region_l].local_index(pair.aux_l);
      z[pair.region_l].segment<2>(4 * l) = z[pair.region_k].segment<2>(4 * k);
      broken[t] = (rng() % 2) == 0;
      if (broken[t]) z[pair.region_l](state_index(l, kVoltage)) += u(rng) + 0.3;
    }
    const DenseVector s = coupling_residual(coupling, z);
    for (std::size_t t = 0; t < broken.size(); ++t) {
      CHECK(s(2 * t) == 0.0);
      CHECK((s(2 * t + 1) != 0.0) == broken[t]);
    }
  }
}

TEST_CASE("merge check catches a corrupted half-line") {
  const GridCase grid = test::bundled_case("ieee30");
  Partition partition = partition_grid(grid, test::bundled_partition("ieee30_default4"));
  const auto& pair = partition.aux_pairs[0];
  for (auto& line : partition.regions[pair.region_k].fragment.lines) {
    if (line.to == pair.aux_k) {
      line.g *= 1.5;
      line.b *= 1.5;
    }
  }
  CHECK_FALSE(merge_check(partition, grid));
}

TEST_CASE("midpoint states reproduce the unpartitioned residuals") {
  for (const auto& [case_name, assignment] :
       {std::pair{std::string("two_bus"), two_regions()},
        std::pair{std::string("ieee30"), test::bundled_partition("ieee30_default4")}}) {
    const GridCase grid = case_name == "two_bus" ? test::two_bus_case() : test::bundled_case(case_name);
    const Partition partition = partition_grid(grid, assignment);
    const DenseVector truth = solve_power_flow(grid).state;
    const RegionStates z = restrict_to_regions(partition, grid, truth);
    CHECK(original_residuals(partition, z).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((gather_original(partition, grid, z) - truth).cwiseAbs().maxCoeff() == 0.0);
    // Auxiliary nodes balance their own equations by construction.
    for (Index r = 0; r < partition.region_count(); ++r) {
      const auto& region = partition.regions[r];
      const DenseVector res = power_flow_residual(z[r], build_admittance(region.fragment));
      CHECK(res.cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("partition errors") {
  const GridCase grid = test::bundled_case("case9");
  CHECK_THROWS_AS(partition_grid(grid, {{1, {1, 2, 3, 4, 5, 6, 7, 8}}}), UnassignedBus);
  CHECK_THROWS_AS(partition_grid(grid, {{1, {1, 2, 3, 4, 5, 6, 7, 8, 9}}, {2, {}}}), EmptyRegion);
  CHECK_THROWS_AS(partition_grid(grid, {{1, {1, 2, 3, 4, 5}}, {2, {5, 6, 7, 8, 9}}}),
                  ValidationError);
  CHECK_THROWS_AS(partition_grid(grid, {{1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}}),
                  UnknownBusReference);
}
