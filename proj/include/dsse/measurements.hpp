#ifndef DSSE_MEASUREMENTS_HPP_
#define DSSE_MEASUREMENTS_HPP_

#include <cstdint>
#include <vector>

#include "dsse/grid.hpp"
#include "dsse/partition.hpp"

namespace dsse {

// Simulation noise. In relative mode the variance of a channel with true
// value x is var * max(x^2, floor^2); in absolute mode it is var.
struct NoiseConfig {
  double theta = 1e-4;
  double voltage = 1e-5;
  double active = 1e-4;
  double reactive = 1e-4;
  double line = 1e-5;  // p, q and i^2 of line flows
  bool relative = true;
  double floor = 1e-2;

  static NoiseConfig none();
};

// Estimation weights (inverse covariances). Independent of NoiseConfig.
struct MeasurementWeights {
  Eigen::Matrix4d nodal;
  Eigen::Matrix3d line;
};

// Sigma = diag(1e4, 1e5, 1e4, 1e4), W = 1e4 I.
MeasurementWeights default_weights();

struct NodalMeasurement {
  int bus = 0;
  Eigen::Vector4d value;   // (theta, v, p, q)
  Eigen::Matrix4d weight;  // Sigma_k
};

struct LineMeasurement {
  int from = 0;
  int to = 0;
  Eigen::Vector3d value;   // (p, q, i^2) seen from `from`
  Eigen::Matrix3d weight;  // W_kl
};

struct MeasurementSet {
  std::vector<NodalMeasurement> nodal;
  std::vector<LineMeasurement> lines;
  std::uint64_t seed = 0;
};

// Noisy measurements of every original bus and of every line internal to a
// region (tie lines are not measured). `truth` is a state of `grid` in case
// order and must satisfy the power flow equations to 1e-8. Deterministic in
// the seed.
MeasurementSet simulate_measurements(const GridCase& grid, const DenseVector& truth,
                                     const Partition& partition, const NoiseConfig& noise,
                                     std::uint64_t seed,
                                     const MeasurementWeights& weights = default_weights());

// Same set with every weight multiplied by `factor`.
MeasurementSet scale_weights(MeasurementSet set, double factor);

// Symmetric PSD square root; entrywise for diagonal input.
DenseMatrix symmetric_sqrt(const DenseMatrix& weight);

// Weighted residual F of the measurements that fall inside `network`:
// Sigma^1/2 (x_k - xhat_k) for measured nodes, then W^1/2 (f(x_k, x_l) - what)
// for measured lines. Nodes without measurements (auxiliary buses) do not
// contribute rows.
class RegionResidual {
 public:
  RegionResidual(const GridCase& network, const MeasurementSet& measurements);

  Index input_dimension() const { return kStatesPerNode * nodes_; }
  Index output_dimension() const {
    return 4 * static_cast<Index>(nodal_.size()) + 3 * static_cast<Index>(lines_.size());
  }
  Index measured_nodes() const { return static_cast<Index>(nodal_.size()); }
  Index measured_lines() const { return static_cast<Index>(lines_.size()); }

  DenseVector evaluate(const DenseVector& z) const;
  DenseMatrix jacobian(const DenseVector& z) const;

 private:
  struct NodalTerm {
    Index node;
    Eigen::Vector4d value;
    Eigen::Matrix4d sqrt_weight;
  };
  struct LineTerm {
    Index k;
    Index l;
    double g;
    double b;
    Eigen::Vector3d value;
    Eigen::Matrix3d sqrt_weight;
  };

  void check(const DenseVector& z) const;

  Index nodes_ = 0;
  std::vector<NodalTerm> nodal_;
  std::vector<LineTerm> lines_;
};

}  // namespace dsse

#endif  // DSSE_MEASUREMENTS_HPP_
