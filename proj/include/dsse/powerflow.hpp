#ifndef DSSE_POWERFLOW_HPP_
#define DSSE_POWERFLOW_HPP_

#include "dsse/grid.hpp"

namespace dsse {

struct PowerFlowSolution {
  DenseVector state;  // full 4N state, p and q back-computed from the flow equations
  int iterations = 0;
  double final_mismatch = 0.0;
};

// Newton-Raphson AC power flow in polar coordinates from a flat start
// (theta = 0, v = setpoint at PV/slack buses, 1 elsewhere). Specified
// injections are gen - load at PV and PQ buses; the slack angle is 0.
// After convergence p and q are recomputed at every bus so that the returned
// state satisfies the power flow equations exactly.
//
// Throws Diverged when max_iter corrections do not reach tol and
// SingularJacobian when the Newton matrix is singular.
PowerFlowSolution solve_power_flow(const GridCase& grid, double tol = 1e-10,
                                   int max_iter = 30);

}  // namespace dsse

#endif  // DSSE_POWERFLOW_HPP_
