#include "dsse/local_solver.hpp"

#include <cmath>
#include <limits>

#include "dsse/format.hpp"

namespace dsse {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 20;
constexpr double kMeritRounding = 1e-10;

double proximal_value(const ProximalTerms& terms, const DenseVector& y) {
  return terms.linear.dot(y) +
         0.5 * (terms.diagonal.array() * (y - terms.anchor).array().square()).sum();
}

}  // namespace

ProximalTerms ProximalTerms::none(Index n) {
  return {DenseVector::Zero(n), DenseVector::Zero(n), DenseVector::Zero(n)};
}

SqpResult solve_proximal_least_squares(const RegionModel& model, const ProximalTerms& terms,
                                       DenseVector start, const SqpOptions& options) {
  const Index n = model.dimension();
  if (start.size() != n || terms.linear.size() != n || terms.diagonal.size() != n ||
      terms.anchor.size() != n) {
    throw DimensionMismatch("local solver: start or proximal terms do not match dimension " +
                            std::to_string(n));
  }
  if (!start.allFinite()) throw ValidationError("local solver: non-finite start");

  SqpResult result;
  result.y = std::move(start);
  double penalty = 1.0;

  for (int iter = 0;; ++iter) {
    RegionEvaluation eval = model.evaluate(result.y);
    const DenseMatrix& jac = eval.residual_jacobian;
    const DenseVector gradient = 2.0 * jac.transpose() * eval.residual + terms.linear +
                                 DenseVector(terms.diagonal.array() * (result.y - terms.anchor).array());
    DenseMatrix hessian = 2.0 * jac.transpose() * jac;
    hessian.diagonal() += terms.diagonal;
    hessian.diagonal().array() += options.hessian_ridge;
    hessian = 0.5 * (hessian + hessian.transpose()).eval();

    const linalg::KktFactorization<double> kkt(hessian, eval.constraint_jacobian);
    const auto step = kkt.solve(gradient, eval.constraint);
    result.regularized = result.regularized || step.regularized;

    // Multipliers for the optimality test come from the least-squares fit
    // C' kappa = -grad, which is far better conditioned than the KKT matrix.
    DenseVector kappa = step.multipliers;
    if (eval.constraint_jacobian.rows() > 0) {
      const Eigen::ColPivHouseholderQR<DenseMatrix> qr(eval.constraint_jacobian.transpose());
      kappa = qr.solve(DenseVector(-gradient));
    }
    const DenseVector constraint_force = eval.constraint_jacobian.transpose() * kappa;
    const double gradient_scale = std::max(linalg::max_abs(gradient), linalg::max_abs(constraint_force));
    result.stationarity = linalg::max_abs(DenseVector(gradient + constraint_force)) / (1.0 + gradient_scale);
    result.feasibility = linalg::max_abs(eval.constraint);
    result.multipliers = kappa;
    result.iterations = iter;
    if (result.stationarity <= options.tolerance && result.feasibility <= options.tolerance) {
      result.converged = true;
      result.evaluation = std::move(eval);
      return result;
    }
    if (iter >= options.max_iterations) {
      result.evaluation = std::move(eval);
      return result;
    }

    // l1 merit with a penalty weight above the multiplier magnitude.
    penalty = std::max(penalty, 1.1 * linalg::max_abs(step.multipliers) + 1.0);
    const auto merit = [&](const DenseVector& y, const DenseVector& f, const DenseVector& h) {
      return f.squaredNorm() + proximal_value(terms, y) + penalty * h.lpNorm<1>();
    };
    const double merit0 = merit(result.y, eval.residual, eval.constraint);
    const double slope = gradient.dot(step.primal_step) - penalty * eval.constraint.lpNorm<1>();

    // Near the solution the predicted decrease drops below the rounding of
    // the merit value itself; Armijo cannot be checked there, so the full
    // step is taken as long as the merit does not rise beyond rounding.
    const double rounding = kMeritRounding * (1.0 + std::abs(merit0));
    const bool at_rounding_floor = -slope <= rounding;

    double alpha = 1.0;
    bool accepted = false;
    DenseVector trial;
    double merit1 = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= kMaxHalvings; ++halving, alpha *= 0.5) {
      trial = result.y + alpha * step.primal_step;
      merit1 = merit(trial, model.residual(trial), model.constraint(trial));
      const double allowed = at_rounding_floor ? rounding : kArmijo * alpha * std::min(slope, 0.0);
      if (std::isfinite(merit1) && merit1 <= merit0 + allowed) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No sufficient decrease left: stop here and let the caller judge.
      result.evaluation = std::move(eval);
      return result;
    }
    result.merit_steps.emplace_back(merit0, merit1);
    result.y = std::move(trial);
  }
}

LocalSolution solve_local(const LocalProblem& problem, double inner_tol, int max_inner) {
  SqpOptions options;
  options.tolerance = inner_tol;
  options.max_iterations = max_inner;
  return solve_local(problem, options);
}

LocalSolution solve_local(const LocalProblem& problem, const SqpOptions& options) {
  if (!problem.model) throw ValidationError("local problem has no region model");
  if (!(problem.rho > 0.0)) throw ValidationError("local problem: rho must be positive");
  const Index n = problem.model->dimension();
  if (problem.anchor.size() != n || problem.coupling.cols() != n ||
      problem.dual.size() != problem.coupling.rows()) {
    throw DimensionMismatch("local problem: anchor, coupling and dual do not conform");
  }
  ProximalTerms terms;
  terms.linear = problem.coupling.transpose() * problem.dual;
  terms.diagonal = DenseVector::Constant(n, problem.rho);
  terms.anchor = problem.anchor;

  SqpResult sqp = solve_proximal_least_squares(*problem.model, terms, problem.anchor, options);
  LocalSolution solution;
  solution.y = std::move(sqp.y);
  solution.kappa = std::move(sqp.multipliers);
  solution.residual = std::move(sqp.evaluation.residual);
  solution.residual_jacobian = std::move(sqp.evaluation.residual_jacobian);
  solution.constraint_jacobian = std::move(sqp.evaluation.constraint_jacobian);
  solution.inner_iterations = sqp.iterations;
  solution.kkt_residual = sqp.stationarity;
  solution.constraint_violation = sqp.feasibility;
  solution.regularized = sqp.regularized;
  if (!sqp.converged) {
    throw InnerDiverged("local solver: no KKT point after " + std::to_string(sqp.iterations) +
                            " iterations (stationarity " + format_double(sqp.stationarity) +
                            ", feasibility " + format_double(sqp.feasibility) + ")",
                        std::move(solution));
  }
  return solution;
}

}  // namespace dsse
