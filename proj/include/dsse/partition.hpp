#ifndef DSSE_PARTITION_HPP_
#define DSSE_PARTITION_HPP_

#include <map>
#include <vector>

#include "dsse/grid.hpp"

namespace dsse {

// Region label -> bus ids of that region.
using RegionAssignment = std::map<int, std::vector<int>>;

// One state vector per region, in region order.
using RegionStates = std::vector<DenseVector>;

struct RegionDescriptor {
  int label = 0;
  std::vector<int> original_nodes;   // bus ids, in case order
  std::vector<int> aux_nodes;        // auxiliary bus ids
  std::vector<Line> internal_lines;  // lines between original nodes of this region
  // Local network: original buses then auxiliary buses; internal lines plus
  // one half-line (admittance 2y) per auxiliary bus.
  GridCase fragment;

  Index node_count() const { return fragment.size(); }
  Index dimension() const { return kStatesPerNode * node_count(); }
  Index local_index(int bus_id) const { return fragment.bus_index(bus_id); }
};

// Auxiliary bus pair created on a tie line. The k side lives in the region
// with the smaller index and carries the +1 coupling entries.
struct AuxPair {
  Index tie_line = 0;  // index into the original case's lines
  int near_k = 0;      // original bus the k half-line attaches to
  int near_l = 0;
  Index region_k = 0;  // region positions in Partition::regions
  Index region_l = 0;
  int aux_k = 0;  // auxiliary bus ids
  int aux_l = 0;
};

struct Partition {
  std::vector<RegionDescriptor> regions;
  std::vector<AuxPair> aux_pairs;

  Index region_count() const { return static_cast<Index>(regions.size()); }
  Index coupling_rows() const { return 2 * static_cast<Index>(aux_pairs.size()); }
  // Region position owning an original bus.
  Index region_of(int bus_id) const;
};

// Assignment with every bus in one region.
RegionAssignment single_region(const GridCase& grid);

// Throws UnassignedBus, EmptyRegion, UnknownBusReference and
// ValidationError (bus assigned twice).
Partition partition_grid(const GridCase& grid, const RegionAssignment& assignment);

// A_i with 2|A| rows and 4|N_i| columns. Row 2t couples theta, row 2t+1
// couples v of pair t: +1 at the k copy, -1 at the l copy.
std::vector<DenseMatrix> build_coupling(const Partition& partition);

// Sum_i A_i z_i.
DenseVector coupling_residual(const std::vector<DenseMatrix>& coupling, const RegionStates& z);

// Recombines every pair of half-lines in series and compares with the
// original tie line; internal lines must match exactly. True iff the
// largest deviation is at most 1e-12.
bool merge_check(const Partition& partition, const GridCase& original);

// The grid that the distributed formulation describes when regions are
// merged back: each tie line m-n becomes m-M-n with a midpoint bus M (id
// aux_k) and two half-lines of admittance 2y.
GridCase midpoint_augmented_case(const GridCase& original, const Partition& partition);

// Splits a state of the original grid into region states. Auxiliary (theta,
// v) are the complex midpoint of the tie line's end voltages, and auxiliary
// (p, q) are the injections the region fragment needs at that voltage.
RegionStates restrict_to_regions(const Partition& partition, const GridCase& original,
                                 const DenseVector& state);

// Same for a state of midpoint_augmented_case: auxiliary (theta, v) copy the
// midpoint bus.
RegionStates restrict_augmented_to_regions(const Partition& partition,
                                           const GridCase& augmented,
                                           const DenseVector& state);

// Original-node states gathered back into case order.
DenseVector gather_original(const Partition& partition, const GridCase& original,
                            const RegionStates& z);

}  // namespace dsse

#endif  // DSSE_PARTITION_HPP_
