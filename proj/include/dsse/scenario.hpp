#ifndef DSSE_SCENARIO_HPP_
#define DSSE_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "dsse/measurements.hpp"
#include "dsse/partition.hpp"
#include "dsse/powerflow.hpp"
#include "dsse/region_model.hpp"

namespace dsse {

// Directory holding the bundled cases and partitions.
std::filesystem::path data_dir();

// A case argument is a path if it names an existing file, otherwise the
// name of a bundled case (data/<name>.yaml).
std::filesystem::path resolve_case_path(const std::string& arg);
// Same for partitions; bundled names resolve to data/<case>_<name>.yaml,
// and "single" means one region holding every bus.
RegionAssignment resolve_partition(const std::string& arg, const GridCase& grid,
                                   const std::string& case_arg);

// Everything an estimation run needs: truth from power flow, simulated
// measurements and the distributed problem.
struct Scenario {
  GridCase grid;
  Partition partition;
  PowerFlowSolution truth;
  RegionStates truth_regions;  // truth restricted with midpoint aux states
  MeasurementSet measurements;
  DistributedProblem problem;
};

Scenario make_scenario(GridCase grid, const RegionAssignment& assignment, const NoiseConfig& noise,
                       std::uint64_t seed);

// Scenario around given measurements (the truth is still computed).
Scenario make_scenario(GridCase grid, const RegionAssignment& assignment, MeasurementSet measurements);

// Flat state for every region fragment.
RegionStates flat_start(const Partition& partition);

}  // namespace dsse

#endif  // DSSE_SCENARIO_HPP_
