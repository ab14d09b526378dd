#ifndef DSSE_CENTRAL_ORACLE_HPP_
#define DSSE_CENTRAL_ORACLE_HPP_

#include <optional>

#include "dsse/measurements.hpp"
#include "dsse/region_model.hpp"

namespace dsse {

struct CentralSolution {
  DenseVector state;        // case order, node-major
  DenseVector multipliers;  // of the power flow equations
  double objective = 0.0;
  int iterations = 0;
  double stationarity = 0.0;
  double feasibility = 0.0;
};

// Monolithic weighted least squares over the whole case:
//   min ||F(x)||^2  s.t. power flow equations at every bus,
// by Gauss-Newton SQP with a Levenberg ridge of 1e-8. Starts flat unless a
// start is given. Throws Diverged when tol is not reached in max_iter
// iterations; SingularKkt propagates.
CentralSolution solve_central(const GridCase& grid, const MeasurementSet& measurements,
                              double tol = 1e-9, int max_iter = 100,
                              const std::optional<DenseVector>& start = std::nullopt);

// Norm of the objective gradient projected onto the null space of the
// constraint Jacobian at x.
double projected_gradient_norm(const GridCase& grid, const MeasurementSet& measurements,
                               const DenseVector& x);

}  // namespace dsse

#endif  // DSSE_CENTRAL_ORACLE_HPP_
