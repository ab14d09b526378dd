#ifndef DSSE_IO_HPP_
#define DSSE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dsse/aladin.hpp"
#include "dsse/grid.hpp"
#include "dsse/measurements.hpp"
#include "dsse/partition.hpp"

namespace dsse {

inline constexpr const char* kToolVersion = "dsse 0.1.0";

// Case files (YAML):
//   name: ieee30
//   base_mva: 100
//   buses:
//     - {id: 1, kind: slack, p_load: 0, q_load: 0, p_gen: 2.602, q_gen: 0, v_setpoint: 1.06}
//   lines:
//     - {from: 1, to: 2, r: 0.0192, x: 0.0575}   # or g, b
// All values per-unit. Unknown keys and shunt fields are rejected.
GridCase parse_case_string(const std::string& text, const std::string& source = "<case>");
GridCase parse_case(const std::filesystem::path& path);
// Lines are written as g, b so parse(emit(case)) == case exactly.
std::string emit_case(const GridCase& grid);

// Partition files: `regions:` mapping a region label to its bus ids.
RegionAssignment parse_partition_string(const std::string& text, const std::string& source = "<partition>");
RegionAssignment parse_partition(const std::filesystem::path& path);
std::string emit_partition(const RegionAssignment& assignment);

// Measurement files: seed, nodal records (bus, value[4], weight 4x4) and
// line records (from, to, value[3], weight 3x3).
MeasurementSet parse_measurements_string(const std::string& text,
                                         const std::string& source = "<measurements>");
MeasurementSet parse_measurements(const std::filesystem::path& path);
std::string emit_measurements(const MeasurementSet& set);

// Bus/gen/branch table files in the common MATLAB case layout
// (mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch). Bus and line shunts and tap
// ratios are dropped, out-of-service gens and branches skipped, parallel
// branches merged. `dropped` receives one note per ignored quantity kind.
GridCase parse_matpower_string(const std::string& text, const std::string& name,
                               std::vector<std::string>* dropped = nullptr);
GridCase parse_matpower(const std::filesystem::path& path,
                        std::vector<std::string>* dropped = nullptr);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);

// Reproducibility preamble of every output file, as '#' comment lines.
std::string output_header(std::uint64_t seed, std::uint64_t config_hash);

// One row per iteration:
// method,k,consensus_violation,step_norm,objective,inner_1..inner_R,
// upload_floats,download_floats,state_error,regularized
std::string history_csv_header(std::size_t regions);
std::string history_csv_rows(const std::vector<IterationRecord>& history, const std::string& method);

std::string comm_csv(const CommLog& log);

struct RunSummary {
  std::string method;
  std::string case_name;
  Index regions = 0;
  Index aux_pairs = 0;
  std::uint64_t seed = 0;
  double rho = 0.0;
  double tolerance = 0.0;
  bool converged = false;
  int iterations = 0;
  double consensus_violation = 0.0;
  double step_norm = 0.0;
  double objective = 0.0;
  double state_error = 0.0;
  std::string diagnostic;
};

std::string emit_summary(const RunSummary& summary);

// Case-order state: bus,theta,v,p,q.
std::string state_csv(const GridCase& grid, const DenseVector& state);

}  // namespace dsse

#endif  // DSSE_IO_HPP_
