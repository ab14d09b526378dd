#include "dsse/scenario.hpp"

#include "dsse/io.hpp"

namespace dsse {

std::filesystem::path data_dir() { return DSSE_DATA_DIR; }

std::filesystem::path resolve_case_path(const std::string& arg) {
  const std::filesystem::path direct(arg);
  if (std::filesystem::is_regular_file(direct)) return direct;
  const std::filesystem::path bundled = data_dir() / (arg + ".yaml");
  if (direct.extension().empty() && std::filesystem::is_regular_file(bundled)) return bundled;
  throw InputError("case file not found: " + arg);
}

RegionAssignment resolve_partition(const std::string& arg, const GridCase& grid,
                                   const std::string& case_arg) {
  if (arg == "single") return single_region(grid);
  const std::filesystem::path direct(arg);
  if (std::filesystem::is_regular_file(direct)) return parse_partition(direct);
  const std::string stem = std::filesystem::path(case_arg).stem().string();
  const std::filesystem::path bundled = data_dir() / (stem + "_" + arg + ".yaml");
  if (direct.extension().empty() && std::filesystem::is_regular_file(bundled)) {
    return parse_partition(bundled);
  }
  throw InputError("partition file not found: " + arg);
}

Scenario make_scenario(GridCase grid, const RegionAssignment& assignment, MeasurementSet measurements) {
  Scenario s;
  s.grid = std::move(grid);
  s.partition = partition_grid(s.grid, assignment);
  s.truth = solve_power_flow(s.grid);
  s.truth_regions = restrict_to_regions(s.partition, s.grid, s.truth.state);
  s.measurements = std::move(measurements);
  s.problem = make_grid_problem(s.partition, s.measurements);
  return s;
}

Scenario make_scenario(GridCase grid, const RegionAssignment& assignment, const NoiseConfig& noise,
                       std::uint64_t seed) {
  const Partition partition = partition_grid(grid, assignment);
  const PowerFlowSolution truth = solve_power_flow(grid);
  MeasurementSet measurements = simulate_measurements(grid, truth.state, partition, noise, seed);
  return make_scenario(std::move(grid), assignment, std::move(measurements));
}

RegionStates flat_start(const Partition& partition) {
  RegionStates z;
  for (const auto& region : partition.regions) z.push_back(flat_state(region.node_count()));
  return z;
}

}  // namespace dsse
