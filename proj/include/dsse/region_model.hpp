#ifndef DSSE_REGION_MODEL_HPP_
#define DSSE_REGION_MODEL_HPP_

#include <memory>
#include <vector>

#include "dsse/measurements.hpp"
#include "dsse/partition.hpp"

namespace dsse {

// Residual F and equality constraint H of one region, with Jacobians
// B = dF/dy and C = dH/dy (rows are residual/constraint entries).
struct RegionEvaluation {
  DenseVector residual;
  DenseMatrix residual_jacobian;
  DenseVector constraint;
  DenseMatrix constraint_jacobian;
};

class RegionModel {
 public:
  virtual ~RegionModel() = default;

  virtual Index dimension() const = 0;
  virtual DenseVector residual(const DenseVector& y) const = 0;
  virtual DenseVector constraint(const DenseVector& y) const = 0;
  virtual DenseMatrix residual_jacobian(const DenseVector& y) const = 0;
  virtual DenseMatrix constraint_jacobian(const DenseVector& y) const = 0;

  RegionEvaluation evaluate(const DenseVector& y) const {
    return {residual(y), residual_jacobian(y), constraint(y), constraint_jacobian(y)};
  }
};

// Measurement residual and power flow equations over a network fragment.
class GridRegionModel final : public RegionModel {
 public:
  GridRegionModel(GridCase network, const MeasurementSet& measurements);

  Index dimension() const override { return residual_.input_dimension(); }
  DenseVector residual(const DenseVector& y) const override { return residual_.evaluate(y); }
  DenseVector constraint(const DenseVector& y) const override {
    return power_flow_residual(y, admittance_);
  }
  DenseMatrix residual_jacobian(const DenseVector& y) const override {
    return residual_.jacobian(y);
  }
  DenseMatrix constraint_jacobian(const DenseVector& y) const override {
    return jacobian_power_flow(y, admittance_);
  }

  const GridCase& network() const { return network_; }
  const RegionResidual& measurement_residual() const { return residual_; }

 private:
  GridCase network_;
  AdmittanceMatrix admittance_;
  RegionResidual residual_;
};

// F(y) = M y - d, H(y) = K y - h. Used for surrogate problems with known
// closed-form solutions.
class AffineRegionModel final : public RegionModel {
 public:
  AffineRegionModel(DenseMatrix m, DenseVector d, DenseMatrix k, DenseVector h);

  Index dimension() const override { return m_.cols(); }
  DenseVector residual(const DenseVector& y) const override { return m_ * y - d_; }
  DenseVector constraint(const DenseVector& y) const override { return k_ * y - h_; }
  DenseMatrix residual_jacobian(const DenseVector&) const override { return m_; }
  DenseMatrix constraint_jacobian(const DenseVector&) const override { return k_; }

 private:
  DenseMatrix m_;
  DenseVector d_;
  DenseMatrix k_;
  DenseVector h_;
};

// Regions of the affinely coupled problem
//   min sum ||F_i(z_i)||^2  s.t.  sum A_i z_i = 0,  H_i(z_i) = 0.
struct DistributedProblem {
  std::vector<std::shared_ptr<const RegionModel>> regions;
  std::vector<DenseMatrix> coupling;

  Index region_count() const { return static_cast<Index>(regions.size()); }
  Index coupling_rows() const { return coupling.empty() ? 0 : coupling.front().rows(); }
  // Throws DimensionMismatch when blocks do not conform.
  void validate() const;
};

DistributedProblem make_grid_problem(const Partition& partition, const MeasurementSet& measurements);

// sum_i ||F_i(z_i)||^2
double total_objective(const DistributedProblem& problem, const RegionStates& z);

}  // namespace dsse

#endif  // DSSE_REGION_MODEL_HPP_
