#include "dsse/partition.hpp"

#include <algorithm>
#include <complex>
#include <set>
#include <unordered_map>

namespace dsse {
namespace {

using Complex = std::complex<double>;

int max_bus_id(const GridCase& grid) {
  int id = 0;
  for (const auto& bus : grid.buses) id = std::max(id, bus.id);
  return id;
}

Bus auxiliary_bus(int id) {
  Bus bus;
  bus.id = id;
  bus.kind = BusKind::PQ;
  return bus;
}

const Line* find_line(const GridCase& grid, int a, int b) {
  for (const auto& line : grid.lines) {
    if ((line.from == a && line.to == b) || (line.from == b && line.to == a)) return &line;
  }
  return nullptr;
}

// Fills auxiliary p, q of every region from its fragment's flows.
void fill_auxiliary_injections(const Partition& partition, RegionStates& z) {
  for (Index r = 0; r < partition.region_count(); ++r) {
    const auto& region = partition.regions[r];
    const AdmittanceMatrix y = build_admittance(region.fragment);
    DenseVector probe = z[r];
    for (int aux : region.aux_nodes) {
      const Index k = region.local_index(aux);
      probe(state_index(k, kActive)) = 0.0;
      probe(state_index(k, kReactive)) = 0.0;
    }
    const DenseVector flows = power_flow_residual(probe, y);
    for (int aux : region.aux_nodes) {
      const Index k = region.local_index(aux);
      z[r](state_index(k, kActive)) = -flows(2 * k);
      z[r](state_index(k, kReactive)) = -flows(2 * k + 1);
    }
  }
}

RegionStates copy_originals(const Partition& partition, const GridCase& grid,
                            const DenseVector& state) {
  if (state.size() != kStatesPerNode * grid.size()) {
    throw DimensionMismatch("state does not match case size");
  }
  RegionStates z;
  for (const auto& region : partition.regions) {
    DenseVector zi = flat_state(region.node_count());
    for (int bus : region.original_nodes) {
      zi.segment<4>(kStatesPerNode * region.local_index(bus)) =
          state.segment<4>(kStatesPerNode * grid.bus_index(bus));
    }
    z.push_back(std::move(zi));
  }
  return z;
}

void set_aux_voltage(const Partition& partition, RegionStates& z, const AuxPair& pair,
                     double theta, double v) {
  for (auto [r, aux] : {std::pair{pair.region_k, pair.aux_k}, std::pair{pair.region_l, pair.aux_l}}) {
    const Index k = partition.regions[r].local_index(aux);
    z[r](state_index(k, kTheta)) = theta;
    z[r](state_index(k, kVoltage)) = v;
  }
}

}  // namespace

Index Partition::region_of(int bus_id) const {
  for (Index r = 0; r < region_count(); ++r) {
    const auto& nodes = regions[r].original_nodes;
    if (std::find(nodes.begin(), nodes.end(), bus_id) != nodes.end()) return r;
  }
  throw UnassignedBus("bus " + std::to_string(bus_id) + " belongs to no region");
}

RegionAssignment single_region(const GridCase& grid) {
  RegionAssignment assignment;
  auto& buses = assignment[1];
  for (const auto& bus : grid.buses) buses.push_back(bus.id);
  return assignment;
}

Partition partition_grid(const GridCase& grid, const RegionAssignment& assignment) {
  std::unordered_map<int, Index> region_of_bus;
  Partition partition;
  for (const auto& [label, buses] : assignment) {
    if (buses.empty()) throw EmptyRegion("region " + std::to_string(label) + " is empty");
    RegionDescriptor region;
    region.label = label;
    for (int bus : buses) {
      grid.bus_index(bus);  // throws UnknownBusReference
      if (!region_of_bus.emplace(bus, partition.region_count()).second) {
        throw ValidationError("bus " + std::to_string(bus) + " assigned to more than one region");
      }
    }
    partition.regions.push_back(std::move(region));
  }
  for (const auto& bus : grid.buses) {
    const auto it = region_of_bus.find(bus.id);
    if (it == region_of_bus.end()) {
      throw UnassignedBus("bus " + std::to_string(bus.id) + " is not assigned to a region");
    }
    auto& region = partition.regions[it->second];
    region.original_nodes.push_back(bus.id);
    region.fragment.buses.push_back(bus);
  }

  const int id_base = max_bus_id(grid);
  for (std::size_t t = 0; t < grid.lines.size(); ++t) {
    const Line& line = grid.lines[t];
    const Index ra = region_of_bus.at(line.from);
    const Index rb = region_of_bus.at(line.to);
    if (ra == rb) {
      partition.regions[ra].internal_lines.push_back(line);
      partition.regions[ra].fragment.lines.push_back(line);
      continue;
    }
    AuxPair pair;
    pair.tie_line = static_cast<Index>(t);
    pair.region_k = std::min(ra, rb);
    pair.region_l = std::max(ra, rb);
    pair.near_k = ra < rb ? line.from : line.to;
    pair.near_l = ra < rb ? line.to : line.from;
    const int serial = static_cast<int>(partition.aux_pairs.size());
    pair.aux_k = id_base + 2 * serial + 1;
    pair.aux_l = id_base + 2 * serial + 2;
    partition.aux_pairs.push_back(pair);
  }
  // Auxiliary buses go after the original buses of each fragment.
  for (const auto& pair : partition.aux_pairs) {
    const Line& line = grid.lines[pair.tie_line];
    auto& rk = partition.regions[pair.region_k];
    auto& rl = partition.regions[pair.region_l];
    rk.aux_nodes.push_back(pair.aux_k);
    rk.fragment.buses.push_back(auxiliary_bus(pair.aux_k));
    rk.fragment.lines.push_back(Line{pair.near_k, pair.aux_k, 2.0 * line.g, 2.0 * line.b});
    rl.aux_nodes.push_back(pair.aux_l);
    rl.fragment.buses.push_back(auxiliary_bus(pair.aux_l));
    rl.fragment.lines.push_back(Line{pair.near_l, pair.aux_l, 2.0 * line.g, 2.0 * line.b});
  }
  for (auto& region : partition.regions) {
    region.fragment.name = grid.name + "/region" + std::to_string(region.label);
    region.fragment.base_mva = grid.base_mva;
  }
  return partition;
}

std::vector<DenseMatrix> build_coupling(const Partition& partition) {
  const Index rows = partition.coupling_rows();
  std::vector<DenseMatrix> coupling;
  for (const auto& region : partition.regions) {
    coupling.push_back(DenseMatrix::Zero(rows, region.dimension()));
  }
  for (std::size_t t = 0; t < partition.aux_pairs.size(); ++t) {
    const auto& pair = partition.aux_pairs[t];
    const Index row = 2 * static_cast<Index>(t);
    const Index k = partition.regions[pair.region_k].local_index(pair.aux_k);
    const Index l = partition.regions[pair.region_l].local_index(pair.aux_l);
    coupling[pair.region_k](row, state_index(k, kTheta)) = 1.0;
    coupling[pair.region_k](row + 1, state_index(k, kVoltage)) = 1.0;
    coupling[pair.region_l](row, state_index(l, kTheta)) = -1.0;
    coupling[pair.region_l](row + 1, state_index(l, kVoltage)) = -1.0;
  }
  return coupling;
}

DenseVector coupling_residual(const std::vector<DenseMatrix>& coupling, const RegionStates& z) {
  if (coupling.size() != z.size()) throw DimensionMismatch("coupling_residual: region count");
  const Index rows = coupling.empty() ? 0 : coupling.front().rows();
  DenseVector s = DenseVector::Zero(rows);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (coupling[i].cols() != z[i].size()) {
      throw DimensionMismatch("coupling_residual: region " + std::to_string(i) + " dimension");
    }
    s += coupling[i] * z[i];
  }
  return s;
}

bool merge_check(const Partition& partition, const GridCase& original) {
  double deviation = 0.0;
  std::size_t internal = 0;
  for (const auto& region : partition.regions) {
    for (const auto& line : region.internal_lines) {
      const Line* ref = find_line(original, line.from, line.to);
      if (ref == nullptr) return false;
      deviation = std::max({deviation, std::abs(ref->g - line.g), std::abs(ref->b - line.b)});
      ++internal;
    }
  }
  if (internal + partition.aux_pairs.size() != original.lines.size()) return false;
  for (const auto& pair : partition.aux_pairs) {
    const Line* half_k = find_line(partition.regions[pair.region_k].fragment, pair.near_k, pair.aux_k);
    const Line* half_l = find_line(partition.regions[pair.region_l].fragment, pair.near_l, pair.aux_l);
    if (half_k == nullptr || half_l == nullptr) return false;
    const Complex yk(half_k->g, half_k->b);
    const Complex yl(half_l->g, half_l->b);
    const Complex series = yk * yl / (yk + yl);
    const Line& tie = original.lines[pair.tie_line];
    deviation = std::max({deviation, std::abs(series.real() - tie.g), std::abs(series.imag() - tie.b)});
  }
  return deviation <= 1e-12;
}

GridCase midpoint_augmented_case(const GridCase& original, const Partition& partition) {
  GridCase augmented = original;
  augmented.name = original.name + "+midpoints";
  std::vector<bool> is_tie(original.lines.size(), false);
  for (const auto& pair : partition.aux_pairs) is_tie[pair.tie_line] = true;
  augmented.lines.clear();
  for (std::size_t t = 0; t < original.lines.size(); ++t) {
    if (!is_tie[t]) augmented.lines.push_back(original.lines[t]);
  }
  for (const auto& pair : partition.aux_pairs) {
    const Line& tie = original.lines[pair.tie_line];
    augmented.buses.push_back(auxiliary_bus(pair.aux_k));
    augmented.lines.push_back(Line{pair.near_k, pair.aux_k, 2.0 * tie.g, 2.0 * tie.b});
    augmented.lines.push_back(Line{pair.aux_k, pair.near_l, 2.0 * tie.g, 2.0 * tie.b});
  }
  return augmented;
}

RegionStates restrict_to_regions(const Partition& partition, const GridCase& original,
                                 const DenseVector& state) {
  RegionStates z = copy_originals(partition, original, state);
  for (const auto& pair : partition.aux_pairs) {
    const Index m = original.bus_index(pair.near_k);
    const Index n = original.bus_index(pair.near_l);
    const Complex vm = std::polar(state(state_index(m, kVoltage)), state(state_index(m, kTheta)));
    const Complex vn = std::polar(state(state_index(n, kVoltage)), state(state_index(n, kTheta)));
    const Complex mid = 0.5 * (vm + vn);
    set_aux_voltage(partition, z, pair, std::arg(mid), std::abs(mid));
  }
  fill_auxiliary_injections(partition, z);
  return z;
}

RegionStates restrict_augmented_to_regions(const Partition& partition,
                                           const GridCase& augmented,
                                           const DenseVector& state) {
  RegionStates z = copy_originals(partition, augmented, state);
  for (const auto& pair : partition.aux_pairs) {
    const Index mid = augmented.bus_index(pair.aux_k);
    set_aux_voltage(partition, z, pair, state(state_index(mid, kTheta)),
                    state(state_index(mid, kVoltage)));
  }
  fill_auxiliary_injections(partition, z);
  return z;
}

DenseVector gather_original(const Partition& partition, const GridCase& original,
                            const RegionStates& z) {
  if (z.size() != partition.regions.size()) throw DimensionMismatch("gather_original: region count");
  DenseVector state(kStatesPerNode * original.size());
  for (Index r = 0; r < partition.region_count(); ++r) {
    const auto& region = partition.regions[r];
    for (int bus : region.original_nodes) {
      state.segment<4>(kStatesPerNode * original.bus_index(bus)) =
          z[r].segment<4>(kStatesPerNode * region.local_index(bus));
    }
  }
  return state;
}

}  // namespace dsse
