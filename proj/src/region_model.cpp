#include "dsse/region_model.hpp"

namespace dsse {

GridRegionModel::GridRegionModel(GridCase network, const MeasurementSet& measurements)
    : network_(std::move(network)),
      admittance_(build_admittance(network_)),
      residual_(network_, measurements) {}

AffineRegionModel::AffineRegionModel(DenseMatrix m, DenseVector d, DenseMatrix k, DenseVector h)
    : m_(std::move(m)), d_(std::move(d)), k_(std::move(k)), h_(std::move(h)) {
  if (m_.rows() != d_.size() || k_.rows() != h_.size() ||
      (k_.rows() > 0 && k_.cols() != m_.cols())) {
    throw DimensionMismatch("AffineRegionModel: blocks do not conform");
  }
  if (k_.rows() == 0) k_.resize(0, m_.cols());
}

void DistributedProblem::validate() const {
  if (regions.size() != coupling.size()) {
    throw DimensionMismatch("distributed problem: " + std::to_string(regions.size()) +
                            " regions but " + std::to_string(coupling.size()) +
                            " coupling matrices");
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (coupling[i].rows() != coupling_rows() || coupling[i].cols() != regions[i]->dimension()) {
      throw DimensionMismatch("distributed problem: coupling matrix of region " +
                              std::to_string(i) + " does not conform");
    }
  }
}

DistributedProblem make_grid_problem(const Partition& partition, const MeasurementSet& measurements) {
  DistributedProblem problem;
  for (const auto& region : partition.regions) {
    problem.regions.push_back(std::make_shared<GridRegionModel>(region.fragment, measurements));
  }
  problem.coupling = build_coupling(partition);
  problem.validate();
  return problem;
}

double total_objective(const DistributedProblem& problem, const RegionStates& z) {
  double total = 0.0;
  for (std::size_t i = 0; i < problem.regions.size(); ++i) {
    total += problem.regions[i]->residual(z[i]).squaredNorm();
  }
  return total;
}

}  // namespace dsse
