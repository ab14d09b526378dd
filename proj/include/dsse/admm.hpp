#ifndef DSSE_ADMM_HPP_
#define DSSE_ADMM_HPP_

#include <string>
#include <vector>

#include "dsse/aladin.hpp"

namespace dsse {

struct AdmmConfig {
  double rho = 1e4;
  int max_outer = 200;
  double tolerance = 1e-4;  // on ||sum A_i y_i||_inf
  SqpOptions inner;
  bool parallel = true;

  void validate() const;
};

// One shared scalar: row r of the coupling, held by two regions. The region
// with the +1 entry is the "first" holder.
struct SharedVariable {
  Index row = 0;
  Index first_region = 0;
  Index first_column = 0;
  Index second_region = 0;
  Index second_column = 0;
};

// Reads the shared variables off the coupling matrices; every row must hold
// exactly one +1 and one -1 entry in different regions.
std::vector<SharedVariable> shared_variables(const DistributedProblem& problem);

struct AdmmResult {
  RegionStates z;
  DenseVector consensus;            // zeta, one entry per coupling row
  std::vector<DenseVector> duals;   // lambda_i, one entry per region copy
  std::vector<IterationRecord> history;
  bool converged = false;
  std::string diagnostic;
};

// Edge-based consensus ADMM. Region i solves
//   min ||F_i(y)||^2 + lambda_i'(E_i y - zeta_i) + rho/2 ||E_i y - zeta_i||^2
//   s.t. H_i(y) = 0,
// zeta takes the mean of the two copies of every shared scalar and
// lambda_i += rho (E_i y_i - zeta_i). E_i selects the copies held by region
// i, in the order of the coupling rows it touches.
//
// The initial duals come from a coupling multiplier lambda0 (one entry per
// row): the first holder starts at +lambda0_r, the second at -lambda0_r, so
// an ALADIN multiplier maps to a consistent ADMM dual.
AdmmResult run_admm(const DistributedProblem& problem, const AdmmConfig& config, RegionStates z0,
                    const DenseVector& lambda0, const RegionStates* truth = nullptr);

}  // namespace dsse

#endif  // DSSE_ADMM_HPP_
