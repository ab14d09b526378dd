#include "dsse/measurements.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace dsse {
namespace {

double channel_variance(double truth, double var, const NoiseConfig& noise) {
  if (!noise.relative) return var;
  return var * std::max(truth * truth, noise.floor * noise.floor);
}

}  // namespace

NoiseConfig NoiseConfig::none() {
  NoiseConfig cfg;
  cfg.theta = cfg.voltage = cfg.active = cfg.reactive = cfg.line = 0.0;
  return cfg;
}

MeasurementWeights default_weights() {
  MeasurementWeights w;
  w.nodal = Eigen::Vector4d(1e4, 1e5, 1e4, 1e4).asDiagonal();
  w.line = Eigen::Vector3d(1e4, 1e4, 1e4).asDiagonal();
  return w;
}

MeasurementSet simulate_measurements(const GridCase& grid, const DenseVector& truth,
                                     const Partition& partition, const NoiseConfig& noise,
                                     std::uint64_t seed, const MeasurementWeights& weights) {
  if (truth.size() != kStatesPerNode * grid.size()) {
    throw DimensionMismatch("simulate_measurements: truth does not match case size");
  }
  const double mismatch = power_flow_residual(truth, build_admittance(grid)).cwiseAbs().maxCoeff();
  if (mismatch > 1e-8) {
    throw ValidationError("simulate_measurements: truth violates power flow by " +
                          std::to_string(mismatch));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noisy = [&](double x, double var) {
    const double v = channel_variance(x, var, noise);
    return v > 0.0 ? x + std::sqrt(v) * normal(rng) : x;
  };

  MeasurementSet set;
  set.seed = seed;
  const std::array<double, 4> nodal_var{noise.theta, noise.voltage, noise.active, noise.reactive};
  for (Index k = 0; k < grid.size(); ++k) {
    NodalMeasurement m;
    m.bus = grid.buses[k].id;
    m.weight = weights.nodal;
    for (Index c = 0; c < 4; ++c) m.value(c) = noisy(truth(kStatesPerNode * k + c), nodal_var[c]);
    set.nodal.push_back(m);
  }
  for (const auto& region : partition.regions) {
    for (const auto& line : region.internal_lines) {
      const Eigen::Vector4d xk = truth.segment<4>(kStatesPerNode * grid.bus_index(line.from));
      const Eigen::Vector4d xl = truth.segment<4>(kStatesPerNode * grid.bus_index(line.to));
      const Eigen::Vector3d f = measurement_line<double>(xk, xl, line.g, line.b);
      LineMeasurement m;
      m.from = line.from;
      m.to = line.to;
      m.weight = weights.line;
      for (Index c = 0; c < 3; ++c) m.value(c) = noisy(f(c), noise.line);
      set.lines.push_back(m);
    }
  }
  return set;
}

MeasurementSet scale_weights(MeasurementSet set, double factor) {
  for (auto& m : set.nodal) m.weight *= factor;
  for (auto& m : set.lines) m.weight *= factor;
  return set;
}

DenseMatrix symmetric_sqrt(const DenseMatrix& weight) {
  if (weight.rows() != weight.cols()) throw DimensionMismatch("symmetric_sqrt: not square");
  const DenseMatrix off = weight - DenseMatrix(weight.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    if ((weight.diagonal().array() < 0.0).any()) {
      throw ValidationError("weight matrix is not positive semidefinite");
    }
    return weight.diagonal().cwiseSqrt().asDiagonal();
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(weight);
  const DenseVector ev = eig.eigenvalues();
  if (ev.minCoeff() < -1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
    throw ValidationError("weight matrix is not positive semidefinite");
  }
  return eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

RegionResidual::RegionResidual(const GridCase& network, const MeasurementSet& measurements)
    : nodes_(network.size()) {
  std::unordered_map<int, Index> local;
  for (Index k = 0; k < network.size(); ++k) local.emplace(network.buses[k].id, k);
  for (const auto& m : measurements.nodal) {
    const auto it = local.find(m.bus);
    if (it == local.end()) continue;
    nodal_.push_back({it->second, m.value, symmetric_sqrt(m.weight)});
  }
  for (const auto& m : measurements.lines) {
    const auto kf = local.find(m.from);
    const auto kt = local.find(m.to);
    if (kf == local.end() || kt == local.end()) continue;
    const Line* line = nullptr;
    for (const auto& candidate : network.lines) {
      if ((candidate.from == m.from && candidate.to == m.to) ||
          (candidate.from == m.to && candidate.to == m.from)) {
        line = &candidate;
      }
    }
    if (line == nullptr) {
      throw ValidationError("measured line " + std::to_string(m.from) + "-" +
                            std::to_string(m.to) + " is not part of network " + network.name);
    }
    lines_.push_back({kf->second, kt->second, line->g, line->b, m.value, symmetric_sqrt(m.weight)});
  }
}

void RegionResidual::check(const DenseVector& z) const {
  if (z.size() != input_dimension()) {
    throw DimensionMismatch("region residual: state has " + std::to_string(z.size()) +
                            " entries, expected " + std::to_string(input_dimension()));
  }
}

DenseVector RegionResidual::evaluate(const DenseVector& z) const {
  check(z);
  DenseVector f(output_dimension());
  Index row = 0;
  for (const auto& term : nodal_) {
    f.segment<4>(row) = term.sqrt_weight * (z.segment<4>(kStatesPerNode * term.node) - term.value);
    row += 4;
  }
  for (const auto& term : lines_) {
    const Eigen::Vector4d xk = z.segment<4>(kStatesPerNode * term.k);
    const Eigen::Vector4d xl = z.segment<4>(kStatesPerNode * term.l);
    f.segment<3>(row) = term.sqrt_weight * (measurement_line<double>(xk, xl, term.g, term.b) - term.value);
    row += 3;
  }
  return f;
}

DenseMatrix RegionResidual::jacobian(const DenseVector& z) const {
  check(z);
  DenseMatrix jac = DenseMatrix::Zero(output_dimension(), input_dimension());
  Index row = 0;
  for (const auto& term : nodal_) {
    jac.block<4, 4>(row, kStatesPerNode * term.node) = term.sqrt_weight;
    row += 4;
  }
  for (const auto& term : lines_) {
    const Eigen::Vector4d xk = z.segment<4>(kStatesPerNode * term.k);
    const Eigen::Vector4d xl = z.segment<4>(kStatesPerNode * term.l);
    const Eigen::Matrix<double, 3, 8> d = jacobian_measurement_line<double>(xk, xl, term.g, term.b);
    jac.block<3, 4>(row, kStatesPerNode * term.k) += term.sqrt_weight * d.leftCols<4>();
    jac.block<3, 4>(row, kStatesPerNode * term.l) += term.sqrt_weight * d.rightCols<4>();
    row += 3;
  }
  return jac;
}

}  // namespace dsse
