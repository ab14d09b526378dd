#include "dsse/admm.hpp"

#include <future>

namespace dsse {
namespace {

// Copies held by one region: (coupling row, local column) pairs.
struct RegionCopies {
  std::vector<Index> rows;
  std::vector<Index> columns;
};

}  // namespace

void AdmmConfig::validate() const {
  if (!(rho > 0.0)) throw ValidationError("ADMM: rho must be positive");
  if (!(tolerance > 0.0)) throw ValidationError("ADMM: tolerance must be positive");
  if (max_outer < 1) throw ValidationError("ADMM: max_outer must be at least 1");
}

std::vector<SharedVariable> shared_variables(const DistributedProblem& problem) {
  problem.validate();
  std::vector<SharedVariable> shared;
  for (Index r = 0; r < problem.coupling_rows(); ++r) {
    SharedVariable var;
    var.row = r;
    int plus = 0, minus = 0;
    for (Index i = 0; i < problem.region_count(); ++i) {
      const DenseMatrix& a = problem.coupling[i];
      for (Index c = 0; c < a.cols(); ++c) {
        const double entry = a(r, c);
        if (entry == 0.0) continue;
        if (entry == 1.0) {
          var.first_region = i;
          var.first_column = c;
          ++plus;
        } else if (entry == -1.0) {
          var.second_region = i;
          var.second_column = c;
          ++minus;
        } else {
          throw ValidationError("ADMM: coupling row " + std::to_string(r) +
                                " has an entry other than +1 or -1");
        }
      }
    }
    if (plus != 1 || minus != 1 || var.first_region == var.second_region) {
      throw ValidationError("ADMM: coupling row " + std::to_string(r) +
                            " does not pair one copy in each of two regions");
    }
    shared.push_back(var);
  }
  return shared;
}

AdmmResult run_admm(const DistributedProblem& problem, const AdmmConfig& config, RegionStates z0,
                    const DenseVector& lambda0, const RegionStates* truth) {
  config.validate();
  const std::vector<SharedVariable> shared = shared_variables(problem);
  const std::size_t regions = problem.regions.size();
  if (z0.size() != regions) throw DimensionMismatch("run_admm: initial guess region count");
  if (lambda0.size() != problem.coupling_rows()) {
    throw DimensionMismatch("run_admm: lambda has " + std::to_string(lambda0.size()) +
                            " entries, expected " + std::to_string(problem.coupling_rows()));
  }
  for (std::size_t i = 0; i < regions; ++i) {
    if (z0[i].size() != problem.regions[i]->dimension()) {
      throw DimensionMismatch("run_admm: initial guess of region " + std::to_string(i));
    }
  }

  std::vector<RegionCopies> copies(regions);
  AdmmResult result;
  result.duals.resize(regions);
  for (const auto& var : shared) {
    copies[var.first_region].rows.push_back(var.row);
    copies[var.first_region].columns.push_back(var.first_column);
    copies[var.second_region].rows.push_back(var.row);
    copies[var.second_region].columns.push_back(var.second_column);
  }
  for (std::size_t i = 0; i < regions; ++i) {
    result.duals[i] = DenseVector(copies[i].rows.size());
  }
  std::vector<std::size_t> cursor(regions, 0);
  for (const auto& var : shared) {
    result.duals[var.first_region](cursor[var.first_region]++) = lambda0(var.row);
    result.duals[var.second_region](cursor[var.second_region]++) = -lambda0(var.row);
  }

  result.consensus = DenseVector(problem.coupling_rows());
  for (const auto& var : shared) {
    result.consensus(var.row) =
        0.5 * (z0[var.first_region](var.first_column) + z0[var.second_region](var.second_column));
  }
  result.z = std::move(z0);

  const auto local_solve = [&](std::size_t i) {
    const Index n = problem.regions[i]->dimension();
    ProximalTerms terms = ProximalTerms::none(n);
    for (std::size_t j = 0; j < copies[i].rows.size(); ++j) {
      const Index c = copies[i].columns[j];
      terms.linear(c) += result.duals[i](j);
      terms.diagonal(c) += config.rho;
      terms.anchor(c) = result.consensus(copies[i].rows[j]);
    }
    // The constant -lambda' zeta does not move the minimizer and is dropped.
    return solve_proximal_least_squares(*problem.regions[i], terms, result.z[i], config.inner);
  };

  for (int k = 1; k <= config.max_outer; ++k) {
    std::vector<SqpResult> solved(regions);
    if (config.parallel && regions > 1) {
      std::vector<std::future<SqpResult>> futures;
      for (std::size_t i = 0; i < regions; ++i) {
        futures.push_back(std::async(std::launch::async, local_solve, i));
      }
      for (auto& f : futures) f.wait();
      for (std::size_t i = 0; i < regions; ++i) solved[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < regions; ++i) solved[i] = local_solve(i);
    }

    IterationRecord rec;
    rec.iteration = k;
    bool inner_failed = false;
    for (std::size_t i = 0; i < regions; ++i) {
      rec.step_norm = std::max(rec.step_norm, linalg::max_abs(DenseVector(solved[i].y - result.z[i])));
      rec.objective += solved[i].evaluation.residual.squaredNorm();
      rec.inner_iterations.push_back(solved[i].iterations);
      rec.regularized = rec.regularized || solved[i].regularized;
      // Each region uploads its copies and downloads the matching consensus values.
      rec.upload_floats += copies[i].rows.size();
      rec.download_floats += copies[i].rows.size();
      inner_failed = inner_failed || !solved[i].converged;
      result.z[i] = std::move(solved[i].y);
    }
    if (inner_failed) {
      result.diagnostic = "iteration " + std::to_string(k) + ": local solver found no KKT point";
      result.history.push_back(rec);
      break;
    }

    rec.consensus_violation = linalg::max_abs(coupling_residual(problem.coupling, result.z));
    if (truth != nullptr) {
      double err = 0.0;
      for (std::size_t i = 0; i < regions; ++i) {
        err = std::max(err, linalg::max_abs(DenseVector(result.z[i] - (*truth)[i])));
      }
      rec.state_error = err;
    }

    for (const auto& var : shared) {
      result.consensus(var.row) = 0.5 * (result.z[var.first_region](var.first_column) +
                                         result.z[var.second_region](var.second_column));
    }
    for (std::size_t i = 0; i < regions; ++i) {
      for (std::size_t j = 0; j < copies[i].rows.size(); ++j) {
        result.duals[i](j) += config.rho * (result.z[i](copies[i].columns[j]) -
                                            result.consensus(copies[i].rows[j]));
      }
    }
    result.history.push_back(rec);
    if (rec.consensus_violation <= config.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged && result.diagnostic.empty()) {
    result.diagnostic = "maximum number of outer iterations (" + std::to_string(config.max_outer) +
                        ") exceeded";
  }
  return result;
}

}  // namespace dsse
