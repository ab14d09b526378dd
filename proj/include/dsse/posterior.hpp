#ifndef DSSE_POSTERIOR_HPP_
#define DSSE_POSTERIOR_HPP_

#include <array>
#include <string>
#include <vector>

#include "dsse/partition.hpp"
#include "dsse/region_model.hpp"

namespace dsse {

// Covariance of the estimate: top-left block of the inverse of
//   [B'B  C'  A']
//   [C    0   0 ]
//   [A    0   0 ],
// obtained by solving against the identity columns of the state block.
// Throws SingularBordered when the states are not identifiable.
DenseMatrix compute_covariance(const DenseMatrix& gauss_newton, const DenseMatrix& constraint_jacobian,
                               const DenseMatrix& coupling);

// Same for a distributed problem at region states z: B_R = diag(B_i),
// C_R = diag(C_i), A_R = [A_1 ... A_R]. Rows follow the stacked z.
DenseMatrix distributed_covariance(const DistributedProblem& problem, const RegionStates& z);

// Relative deviations of nominals smaller than this are not reported.
inline constexpr double kNominalFloor = 1e-3;

struct ComponentPosterior {
  double nominal = 0.0;
  double absolute_std = 0.0;
  double relative_std = 0.0;  // absolute_std / |nominal|, 0 when not reported
  bool near_zero = false;     // |nominal| < kNominalFloor
  bool reference = false;     // angle of the reference bus, printed "*"
  bool included() const { return !near_zero && !reference; }
};

struct BusPosterior {
  int bus = 0;
  std::array<ComponentPosterior, kStatesPerNode> components;
};

struct PosteriorReport {
  std::vector<BusPosterior> buses;  // original buses in case order
  // Mean relative deviation over included entries per component, and how
  // many entries went into it.
  std::array<double, kStatesPerNode> average_relative{};
  std::array<int, kStatesPerNode> average_count{};
  double symmetry_error = 0.0;      // ||Cov - Cov'||_inf / ||Cov||_inf
  double min_eigen_ratio = 0.0;     // smallest / largest eigenvalue of Cov
};

// Posterior report at converged region states. Auxiliary buses enter the
// covariance but are left out of the per-bus rows and averages.
PosteriorReport compute_posterior(const Partition& partition, const GridCase& original,
                                  const DistributedProblem& problem, const RegionStates& z);

// Builds the report from a covariance indexed like `state` (case order).
PosteriorReport report_from_covariance(const GridCase& grid, const DenseVector& state,
                                       const DenseMatrix& covariance);

// Aligned text table: header "Bus#  theta  v  p  q", one row per selected
// bus in percent, then an AVG row. Reference angles print "*", near-zero
// nominals print the absolute deviation prefixed with "abs ".
std::string render_table(const PosteriorReport& report, const std::vector<int>& selected_buses);

// bus,component,nominal,std_abs,std_rel,flag
std::string posterior_csv(const PosteriorReport& report);

}  // namespace dsse

#endif  // DSSE_POSTERIOR_HPP_
