#ifndef DSSE_GRID_HPP_
#define DSSE_GRID_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsse/errors.hpp"
#include "dsse/linalg.hpp"

namespace dsse {

enum class BusKind { Slack, PV, PQ };

// All electrical quantities are per-unit; angles are radians.
struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double p_load = 0.0;
  double q_load = 0.0;
  double p_gen = 0.0;
  double q_gen = 0.0;
  double v_setpoint = 1.0;

  bool operator==(const Bus&) const = default;
};

// Series admittance y = g + jb of a line.
struct Line {
  int from = 0;
  int to = 0;
  double g = 0.0;
  double b = 0.0;

  // g = r/(r^2+x^2), b = -x/(r^2+x^2).
  static Line from_impedance(int from, int to, double r, double x);

  bool operator==(const Line&) const = default;
};

struct GridCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;

  Index size() const { return static_cast<Index>(buses.size()); }
  // Position of a bus id in `buses`; throws UnknownBusReference.
  Index bus_index(int id) const;
  const Bus& slack() const;

  bool operator==(const GridCase&) const = default;
};

// Real and imaginary parts of Y. Shunt-free: every row sums to zero.
struct AdmittanceMatrix {
  DenseMatrix g;
  DenseMatrix b;

  Index size() const { return g.rows(); }
};

// Node-major layout (theta_k, v_k, p_k, q_k) for every node.
inline constexpr Index kStatesPerNode = 4;
enum StateComponent : Index { kTheta = 0, kVoltage = 1, kActive = 2, kReactive = 3 };

constexpr Index state_index(Index node, StateComponent c) {
  return kStatesPerNode * node + c;
}

AdmittanceMatrix build_admittance(const GridCase& grid);

// Validates ids, references and the one-slack rule.
void validate_case(const GridCase& grid);

// Flat state: theta = 0, v = 1, p = q = 0.
DenseVector flat_state(Index nodes);

// Power flow mismatch p_k - P_k(theta, v), q_k - Q_k(theta, v); (p, q) pairs per node.
template <typename Derived>
Vector<typename Derived::Scalar> power_flow_residual(const Eigen::MatrixBase<Derived>& x,
                                                     const AdmittanceMatrix& y) {
  using Scalar = typename Derived::Scalar;
  using std::cos, std::sin;
  const Index n = y.size();
  if (x.size() != kStatesPerNode * n) {
    throw DimensionMismatch("power_flow_residual: state has " + std::to_string(x.size()) +
                            " entries, expected " + std::to_string(kStatesPerNode * n));
  }
  Vector<Scalar> r(2 * n);
  for (Index k = 0; k < n; ++k) {
    const Scalar theta_k = x(state_index(k, kTheta));
    const Scalar v_k = x(state_index(k, kVoltage));
    Scalar p_sum(0), q_sum(0);
    for (Index l = 0; l < n; ++l) {
      const double gkl = y.g(k, l);
      const double bkl = y.b(k, l);
      if (gkl == 0.0 && bkl == 0.0) continue;
      const Scalar angle = theta_k - x(state_index(l, kTheta));
      const Scalar v_l = x(state_index(l, kVoltage));
      p_sum += v_l * (gkl * cos(angle) + bkl * sin(angle));
      q_sum += v_l * (gkl * sin(angle) - bkl * cos(angle));
    }
    r(2 * k) = x(state_index(k, kActive)) - v_k * p_sum;
    r(2 * k + 1) = x(state_index(k, kReactive)) - v_k * q_sum;
  }
  return r;
}

// Analytic Jacobian of power_flow_residual, 2N x 4N.
template <typename Derived>
Matrix<typename Derived::Scalar> jacobian_power_flow(const Eigen::MatrixBase<Derived>& x,
                                                     const AdmittanceMatrix& y) {
  using Scalar = typename Derived::Scalar;
  using std::cos, std::sin;
  const Index n = y.size();
  if (x.size() != kStatesPerNode * n) {
    throw DimensionMismatch("jacobian_power_flow: state does not match admittance size");
  }
  Matrix<Scalar> jac = Matrix<Scalar>::Zero(2 * n, kStatesPerNode * n);
  for (Index k = 0; k < n; ++k) {
    const Index rp = 2 * k;
    const Index rq = 2 * k + 1;
    const Scalar theta_k = x(state_index(k, kTheta));
    const Scalar v_k = x(state_index(k, kVoltage));
    Scalar dp_dvk(0), dq_dvk(0), dp_dthk(0), dq_dthk(0);
    for (Index l = 0; l < n; ++l) {
      const double gkl = y.g(k, l);
      const double bkl = y.b(k, l);
      if (gkl == 0.0 && bkl == 0.0) continue;
      const Scalar angle = theta_k - x(state_index(l, kTheta));
      const Scalar v_l = x(state_index(l, kVoltage));
      const Scalar c = cos(angle);
      const Scalar s = sin(angle);
      const Scalar pc = gkl * c + bkl * s;  // coefficient of v_k v_l in P_k
      const Scalar qc = gkl * s - bkl * c;  // coefficient of v_k v_l in Q_k
      dp_dvk += v_l * pc;
      dq_dvk += v_l * qc;
      if (l == k) continue;
      // d pc / d theta_k = -qc, d qc / d theta_k = pc
      dp_dthk += v_k * v_l * (-qc);
      dq_dthk += v_k * v_l * pc;
      jac(rp, state_index(l, kTheta)) = -(v_k * v_l * qc);
      jac(rq, state_index(l, kTheta)) = -(-v_k * v_l * pc);
      jac(rp, state_index(l, kVoltage)) = -(v_k * pc);
      jac(rq, state_index(l, kVoltage)) = -(v_k * qc);
    }
    // Diagonal term v_k^2 G_kk contributes twice to d/dv_k.
    dp_dvk += v_k * y.g(k, k);
    dq_dvk += -v_k * y.b(k, k);
    jac(rp, state_index(k, kTheta)) = -dp_dthk;
    jac(rq, state_index(k, kTheta)) = -dq_dthk;
    jac(rp, state_index(k, kVoltage)) = -dp_dvk;
    jac(rq, state_index(k, kVoltage)) = -dq_dvk;
    jac(rp, state_index(k, kActive)) = Scalar(1);
    jac(rq, state_index(k, kReactive)) = Scalar(1);
  }
  return jac;
}

// Line flow measurement functions seen from the k end of line (k, l):
//   f_p = v_k^2 g - v_k v_l (g cos + b sin)
//   f_q = -v_k^2 b + v_k v_l (b cos - g sin)
//   f_i = (f_p^2 + f_q^2) / v_k^2
// f_i uses f_p and f_q; the squared-current identity |I|^2 = |S|^2/v^2 fixes
// that reading. The g sin term of f_q carries the sign that makes
// sum_l f_q(k, l) equal the reactive injection q_k.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> measurement_line(const Eigen::Matrix<Scalar, 4, 1>& xk,
                                             const Eigen::Matrix<Scalar, 4, 1>& xl,
                                             double g, double b) {
  using std::cos, std::sin;
  const Scalar vk = xk(kVoltage);
  const Scalar vl = xl(kVoltage);
  if (vk == Scalar(0)) throw ZeroVoltage("measurement_line: v_k = 0");
  const Scalar angle = xk(kTheta) - xl(kTheta);
  const Scalar c = cos(angle);
  const Scalar s = sin(angle);
  Eigen::Matrix<Scalar, 3, 1> f;
  f(0) = vk * (vk * g - vl * g * c) - vk * (vl * b * s);
  f(1) = -vk * (vk * b - vl * b * c) - vk * (vl * g * s);
  f(2) = (f(0) * f(0) + f(1) * f(1)) / (vk * vk);
  return f;
}

// 3 x 8 Jacobian, columns (x_k, x_l).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 8> jacobian_measurement_line(const Eigen::Matrix<Scalar, 4, 1>& xk,
                                                      const Eigen::Matrix<Scalar, 4, 1>& xl,
                                                      double g, double b) {
  using std::cos, std::sin;
  const Scalar vk = xk(kVoltage);
  const Scalar vl = xl(kVoltage);
  if (vk == Scalar(0)) throw ZeroVoltage("jacobian_measurement_line: v_k = 0");
  const Scalar angle = xk(kTheta) - xl(kTheta);
  const Scalar c = cos(angle);
  const Scalar s = sin(angle);
  const Eigen::Matrix<Scalar, 3, 1> f = measurement_line<Scalar>(xk, xl, g, b);

  Eigen::Matrix<Scalar, 3, 8> jac = Eigen::Matrix<Scalar, 3, 8>::Zero();
  const Scalar dp_dth = vk * vl * (g * s - b * c);
  const Scalar dq_dth = -vk * vl * (b * s + g * c);
  jac(0, kTheta) = dp_dth;
  jac(0, 4 + kTheta) = -dp_dth;
  jac(0, kVoltage) = 2.0 * vk * g - vl * (g * c + b * s);
  jac(0, 4 + kVoltage) = -vk * (g * c + b * s);
  jac(1, kTheta) = dq_dth;
  jac(1, 4 + kTheta) = -dq_dth;
  jac(1, kVoltage) = -2.0 * vk * b + vl * (b * c - g * s);
  jac(1, 4 + kVoltage) = vk * (b * c - g * s);
  const Scalar inv_v2 = Scalar(1) / (vk * vk);
  jac.row(2) = (2.0 * f(0) * jac.row(0) + 2.0 * f(1) * jac.row(1)) * inv_v2;
  jac(2, kVoltage) -= 2.0 * f(2) / vk;
  return jac;
}

}  // namespace dsse

#endif  // DSSE_GRID_HPP_
