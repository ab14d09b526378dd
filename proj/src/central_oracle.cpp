#include "dsse/central_oracle.hpp"

#include "dsse/local_solver.hpp"

#include "dsse/format.hpp"

namespace dsse {

constexpr double kLevenbergRidge = 1e-8;

CentralSolution solve_central(const GridCase& grid, const MeasurementSet& measurements,
                              double tol, int max_iter, const std::optional<DenseVector>& start) {
  validate_case(grid);
  const GridRegionModel model(grid, measurements);
  DenseVector x0 = start ? *start : flat_state(grid.size());
  if (x0.size() != model.dimension()) throw DimensionMismatch("solve_central: start dimension");

  SqpOptions options;
  options.tolerance = tol;
  options.max_iterations = max_iter;
  options.hessian_ridge = kLevenbergRidge;
  SqpResult sqp = solve_proximal_least_squares(model, ProximalTerms::none(model.dimension()),
                                               std::move(x0), options);
  if (!sqp.converged) {
    throw Diverged("central estimator: no KKT point after " + std::to_string(sqp.iterations) +
                   " iterations (stationarity " + format_double(sqp.stationarity) +
                   ", feasibility " + format_double(sqp.feasibility) + ")");
  }
  CentralSolution solution;
  solution.objective = sqp.evaluation.residual.squaredNorm();
  solution.state = std::move(sqp.y);
  solution.multipliers = std::move(sqp.multipliers);
  solution.iterations = sqp.iterations;
  solution.stationarity = sqp.stationarity;
  solution.feasibility = sqp.feasibility;
  return solution;
}

double projected_gradient_norm(const GridCase& grid, const MeasurementSet& measurements,
                               const DenseVector& x) {
  const GridRegionModel model(grid, measurements);
  const RegionEvaluation eval = model.evaluate(x);
  const DenseVector gradient = 2.0 * eval.residual_jacobian.transpose() * eval.residual;
  const Eigen::FullPivLU<DenseMatrix> lu(eval.constraint_jacobian);
  const DenseMatrix kernel = lu.kernel();
  if (lu.rank() == eval.constraint_jacobian.cols()) return 0.0;
  // Orthonormal basis, so the norm does not depend on the kernel scaling.
  const Eigen::HouseholderQR<DenseMatrix> qr(kernel);
  const DenseMatrix null_space =
      qr.householderQ() * DenseMatrix::Identity(kernel.rows(), kernel.cols());
  return linalg::max_abs(DenseVector(null_space.transpose() * gradient));
}

}  // namespace dsse
