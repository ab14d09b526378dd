#ifndef DSSE_ALADIN_HPP_
#define DSSE_ALADIN_HPP_

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dsse/coordinator.hpp"
#include "dsse/local_solver.hpp"

namespace dsse {

struct AladinConfig {
  double rho = 1e4;
  double epsilon = 1e-4;
  int max_outer = 100;
  SqpOptions inner;
  bool parallel = true;  // solve regions on separate threads

  void validate() const;
};

// One row of the iteration history, shared by ALADIN and ADMM.
struct IterationRecord {
  int iteration = 0;
  double consensus_violation = 0.0;  // ||sum A_i y_i||_inf
  double step_norm = 0.0;            // max_i ||y_i - z_i||_inf
  double objective = 0.0;            // sum ||F_i(y_i)||^2
  std::vector<int> inner_iterations;
  double state_error = std::numeric_limits<double>::quiet_NaN();  // vs truth, if known
  std::size_t upload_floats = 0;
  std::size_t download_floats = 0;
  bool regularized = false;  // consensus QP needed the KKT ridge
};

// Float counts predicted by the closed-form communication formulas:
// upload sum_i (6|N_i| + 16|N_i|^2 + 2|A|), download 2|A| + 4|N_i| per region.
struct CommCounts {
  std::size_t upload = 0;
  std::vector<std::size_t> download;

  std::size_t total_download() const;
};

CommCounts comm_counts(const Partition& partition);
// Same formulas with |N_i| = dim_i / 4 and |A| = rows(A) / 2.
CommCounts comm_counts(const DistributedProblem& problem);

struct CommRecord {
  int iteration = 0;
  std::size_t upload_formula = 0;
  std::size_t upload_actual = 0;
  std::size_t download_formula = 0;
  std::size_t download_actual = 0;
  bool download_phase = false;  // false on the terminating iteration

  long long upload_delta() const {
    return static_cast<long long>(upload_actual) - static_cast<long long>(upload_formula);
  }
  long long download_delta() const {
    return static_cast<long long>(download_actual) - static_cast<long long>(download_formula);
  }
};

struct CommLog {
  std::vector<CommRecord> records;
};

// Actual counts recorded in the history next to the formula counts.
CommLog measured_comm(const std::vector<IterationRecord>& history, const CommCounts& formula);

// Region -> coordinator payload: B'B packed (upper triangle, column-major),
// C dense, B'b and A y. Telemetry scalars (step norm, objective, inner
// iterations) ride along but are not payload.
struct UploadMessage {
  DenseVector packed_gauss_newton;
  DenseMatrix constraint_jacobian;
  DenseVector gradient;
  DenseVector coupled_state;

  double step_norm = 0.0;
  double objective = 0.0;
  int inner_iterations = 0;

  std::size_t float_count() const;
};

// Coordinator -> region payload: lambda+ and dy_i.
struct DownloadMessage {
  DenseVector dual;
  DenseVector step;

  std::size_t float_count() const;
};

DenseVector pack_symmetric(const DenseMatrix& m);
DenseMatrix unpack_symmetric(const DenseVector& packed, Index n);

struct AladinResult {
  RegionStates z;      // final local solutions y
  DenseVector lambda;
  std::vector<IterationRecord> history;
  CommLog comm;
  bool converged = false;
  std::string diagnostic;
};

// Gauss-Newton ALADIN. Each iteration: parallel local solves with
// sensitivities, termination when ||sum A_i y_i||_inf <= eps and
// max_i ||y_i - z_i||_inf <= eps, otherwise the coupled QP and a full step.
// Inner solver failures end the run with a diagnostic instead of throwing.
AladinResult run_aladin(const DistributedProblem& problem, const AladinConfig& config,
                        RegionStates z0, DenseVector lambda0, const RegionStates* truth = nullptr);

}  // namespace dsse

#endif  // DSSE_ALADIN_HPP_
