#include "dsse/powerflow.hpp"

#include <vector>

namespace dsse {

PowerFlowSolution solve_power_flow(const GridCase& grid, double tol, int max_iter) {
  validate_case(grid);
  const Index n = grid.size();
  const AdmittanceMatrix y = build_admittance(grid);

  DenseVector x = flat_state(n);
  std::vector<Index> rows;  // residual rows that are specified
  std::vector<Index> cols;  // state columns that are unknown
  for (Index k = 0; k < n; ++k) {
    const Bus& bus = grid.buses[k];
    if (bus.kind != BusKind::PQ) x(state_index(k, kVoltage)) = bus.v_setpoint;
    x(state_index(k, kActive)) = bus.p_gen - bus.p_load;
    x(state_index(k, kReactive)) = bus.q_gen - bus.q_load;
    if (bus.kind == BusKind::Slack) continue;
    rows.push_back(2 * k);
    cols.push_back(state_index(k, kTheta));
  }
  for (Index k = 0; k < n; ++k) {
    if (grid.buses[k].kind != BusKind::PQ) continue;
    rows.push_back(2 * k + 1);
    cols.push_back(state_index(k, kVoltage));
  }
  const Index m = static_cast<Index>(rows.size());

  PowerFlowSolution solution;
  for (int iter = 0;; ++iter) {
    const DenseVector full = power_flow_residual(x, y);
    DenseVector mismatch(m);
    for (Index i = 0; i < m; ++i) mismatch(i) = full(rows[i]);
    solution.final_mismatch = m > 0 ? mismatch.cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(solution.final_mismatch)) {
      throw Diverged("power flow: mismatch became non-finite at iteration " +
                     std::to_string(iter));
    }
    if (solution.final_mismatch <= tol) {
      solution.iterations = iter;
      break;
    }
    if (iter >= max_iter) {
      throw Diverged("power flow: mismatch " + std::to_string(solution.final_mismatch) +
                     " after " + std::to_string(max_iter) + " iterations");
    }
    const DenseMatrix jac_full = jacobian_power_flow(x, y);
    DenseMatrix jac(m, m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) jac(i, j) = jac_full(rows[i], cols[j]);
    }
    DenseVector step;
    try {
      step = linalg::solve_linear(jac, DenseVector(-mismatch));
    } catch (const SingularMatrix& e) {
      throw SingularJacobian(std::string("power flow: ") + e.what());
    }
    for (Index j = 0; j < m; ++j) x(cols[j]) += step(j);
  }

  // Back-compute injections everywhere: p_k = P_k(theta, v), q_k = Q_k(theta, v).
  DenseVector zero_injection = x;
  for (Index k = 0; k < n; ++k) {
    zero_injection(state_index(k, kActive)) = 0.0;
    zero_injection(state_index(k, kReactive)) = 0.0;
  }
  const DenseVector flows = power_flow_residual(zero_injection, y);
  for (Index k = 0; k < n; ++k) {
    x(state_index(k, kActive)) = -flows(2 * k);
    x(state_index(k, kReactive)) = -flows(2 * k + 1);
  }
  solution.state = std::move(x);
  return solution;
}

}  // namespace dsse
