#include "dsse/coordinator.hpp"

#include "dsse/linalg.hpp"

namespace dsse {

ConsensusSolution solve_consensus(const ConsensusQP& qp) {
  const std::size_t regions = qp.gauss_newton.size();
  if (qp.gradient.size() != regions || qp.constraint_jacobian.size() != regions ||
      qp.coupling.size() != regions) {
    throw DimensionMismatch("consensus QP: per-region block counts differ");
  }
  const Index coupling_rows = qp.coupling_residual.size();
  std::vector<Index> offset(regions + 1, 0);
  std::vector<Index> constraint_offset(regions + 1, 0);
  for (std::size_t i = 0; i < regions; ++i) {
    const Index n = qp.gauss_newton[i].rows();
    if (qp.gauss_newton[i].cols() != n || qp.gradient[i].size() != n ||
        qp.coupling[i].rows() != coupling_rows || qp.coupling[i].cols() != n ||
        (qp.constraint_jacobian[i].rows() > 0 && qp.constraint_jacobian[i].cols() != n)) {
      throw DimensionMismatch("consensus QP: blocks of region " + std::to_string(i) +
                              " do not conform");
    }
    offset[i + 1] = offset[i] + n;
    constraint_offset[i + 1] = constraint_offset[i] + qp.constraint_jacobian[i].rows();
  }
  const Index n = offset[regions];
  const Index m = coupling_rows + constraint_offset[regions];

  DenseMatrix hessian = DenseMatrix::Zero(n, n);
  DenseVector gradient(n);
  DenseMatrix constraints = DenseMatrix::Zero(m, n);
  DenseVector residual = DenseVector::Zero(m);
  residual.head(coupling_rows) = qp.coupling_residual;
  for (std::size_t i = 0; i < regions; ++i) {
    const Index ni = offset[i + 1] - offset[i];
    hessian.block(offset[i], offset[i], ni, ni) = 2.0 * qp.gauss_newton[i];
    gradient.segment(offset[i], ni) = 2.0 * qp.gradient[i];
    constraints.block(0, offset[i], coupling_rows, ni) = qp.coupling[i];
    const Index ci = qp.constraint_jacobian[i].rows();
    if (ci > 0) {
      constraints.block(coupling_rows + constraint_offset[i], offset[i], ci, ni) =
          qp.constraint_jacobian[i];
    }
  }

  linalg::KktSolution<double> kkt;
  try {
    kkt = linalg::solve_kkt(linalg::KktSystem<double>{hessian, constraints, gradient, residual});
  } catch (const SingularKkt& e) {
    const Eigen::FullPivLU<DenseMatrix> rank(constraints);
    if (rank.rank() < m) {
      throw SingularKkt("consensus QP: stacked coupling/constraint rows are rank deficient (rank " +
                        std::to_string(rank.rank()) + " of " + std::to_string(m) + ")");
    }
    throw SingularKkt(std::string("consensus QP: Hessian degenerate on the constraint null space: ") +
                      e.what());
  }

  ConsensusSolution solution;
  solution.regularized = kkt.regularized;
  solution.coupling_multipliers = kkt.multipliers.head(coupling_rows);
  for (std::size_t i = 0; i < regions; ++i) {
    solution.step.push_back(kkt.primal_step.segment(offset[i], offset[i + 1] - offset[i]));
    solution.constraint_multipliers.push_back(kkt.multipliers.segment(
        coupling_rows + constraint_offset[i], constraint_offset[i + 1] - constraint_offset[i]));
  }
  return solution;
}

std::pair<RegionStates, DenseVector> apply_update(const RegionStates& y, const RegionStates& dy,
                                                  const DenseVector& lambda_qp) {
  if (y.size() != dy.size()) throw DimensionMismatch("apply_update: region count");
  RegionStates z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i].size() != dy[i].size()) throw DimensionMismatch("apply_update: region dimension");
    z[i] = y[i] + dy[i];
  }
  return {std::move(z), lambda_qp};
}

}  // namespace dsse
