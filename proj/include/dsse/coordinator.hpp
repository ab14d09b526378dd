#ifndef DSSE_COORDINATOR_HPP_
#define DSSE_COORDINATOR_HPP_

#include <utility>
#include <vector>

#include "dsse/partition.hpp"

namespace dsse {

// Data of the coupled QP
//   min sum ||B_i dy_i||^2 + 2 dy_i' B_i' b_i
//   s.t. sum A_i (y_i + dy_i) = 0,  C_i dy_i = 0,
// as the coordinator receives it: Gauss-Newton blocks B_i'B_i, gradients
// B_i'b_i, constraint Jacobians C_i, coupling A_i and s = sum A_i y_i.
struct ConsensusQP {
  std::vector<DenseMatrix> gauss_newton;
  std::vector<DenseVector> gradient;
  std::vector<DenseMatrix> constraint_jacobian;
  std::vector<DenseMatrix> coupling;
  DenseVector coupling_residual;
};

struct ConsensusSolution {
  RegionStates step;                        // dy_i
  DenseVector coupling_multipliers;         // lambda^QP
  std::vector<DenseVector> constraint_multipliers;  // kappa_i^QP
  bool regularized = false;                 // the KKT ridge was engaged
};

// One bordered KKT factorization with block-diagonal Hessian 2 B_i'B_i and
// the stacked constraints [A_1 .. A_R; diag(C_i)]. On failure throws
// SingularKkt naming whether the constraint rows are rank deficient.
ConsensusSolution solve_consensus(const ConsensusQP& qp);

// z+ = y + dy, lambda+ = lambda^QP (full step).
std::pair<RegionStates, DenseVector> apply_update(const RegionStates& y, const RegionStates& dy,
                                                  const DenseVector& lambda_qp);

}  // namespace dsse

#endif  // DSSE_COORDINATOR_HPP_
