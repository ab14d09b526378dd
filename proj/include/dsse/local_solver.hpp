#ifndef DSSE_LOCAL_SOLVER_HPP_
#define DSSE_LOCAL_SOLVER_HPP_

#include <memory>
#include <utility>
#include <vector>

#include "dsse/region_model.hpp"

namespace dsse {

// Extra objective terms on top of ||F(y)||^2:
//   linear' y + 1/2 sum_j diagonal_j (y_j - anchor_j)^2.
struct ProximalTerms {
  DenseVector linear;
  DenseVector diagonal;
  DenseVector anchor;

  static ProximalTerms none(Index n);
};

struct SqpOptions {
  double tolerance = 1e-8;
  int max_iterations = 50;
  // Added to the Gauss-Newton Hessian for definiteness (Levenberg term).
  double hessian_ridge = 0.0;
};

struct SqpResult {
  DenseVector y;
  DenseVector multipliers;      // of H(y) = 0
  RegionEvaluation evaluation;  // at y
  int iterations = 0;
  // ||grad + C' kappa||_inf / (1 + max(||grad||_inf, ||C' kappa||_inf)).
  // Gradient entries reach 1e6 with the default weights, so an absolute
  // test would sit below the rounding floor of the KKT solve.
  double stationarity = 0.0;
  double feasibility = 0.0;     // ||H(y)||_inf
  bool converged = false;
  bool regularized = false;     // the KKT ridge was engaged at some iteration
  // Merit before and after each accepted step, same penalty weight.
  std::vector<std::pair<double, double>> merit_steps;
};

// Equality-constrained Gauss-Newton SQP:
//   min ||F(y)||^2 + proximal terms  s.t.  H(y) = 0.
// Each iteration solves the KKT system with Hessian 2B'B + diag + ridge and
// takes the step with a backtracking Armijo search on the l1 merit
// objective + nu ||H||_1 (factor 0.5, at most 20 halvings). Stops when the
// scaled Lagrangian gradient (see SqpResult::stationarity) and ||H||_inf are
// both below tolerance.
SqpResult solve_proximal_least_squares(const RegionModel& model, const ProximalTerms& terms,
                                       DenseVector start, const SqpOptions& options);

// Region NLP of the parallel step:
//   min ||F_i(y)||^2 + lambda' A_i y + rho/2 ||y - z_i||^2  s.t.  H_i(y) = 0
struct LocalProblem {
  std::shared_ptr<const RegionModel> model;
  DenseMatrix coupling;  // A_i
  double rho = 1e4;
  DenseVector dual;      // lambda
  DenseVector anchor;    // z_i, also the warm start
};

struct LocalSolution {
  DenseVector y;
  DenseVector kappa;
  DenseVector residual;             // b_i = F_i(y)
  DenseMatrix residual_jacobian;    // B_i
  DenseMatrix constraint_jacobian;  // C_i
  int inner_iterations = 0;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  bool regularized = false;
};

class InnerDiverged : public SolverError {
 public:
  InnerDiverged(const std::string& what, LocalSolution last)
      : SolverError(what), last_(std::move(last)) {}
  const LocalSolution& last_iterate() const { return last_; }

 private:
  LocalSolution last_;
};

// Throws InnerDiverged (carrying the last iterate) when max_inner iterations
// do not reach inner_tol; SingularKkt propagates.
LocalSolution solve_local(const LocalProblem& problem, double inner_tol = 1e-8, int max_inner = 50);

// Same, with explicit options (ridge, iteration cap).
LocalSolution solve_local(const LocalProblem& problem, const SqpOptions& options);

}  // namespace dsse

#endif  // DSSE_LOCAL_SOLVER_HPP_
