#include "dsse/grid.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace dsse {

Line Line::from_impedance(int from, int to, double r, double x) {
  const double denom = r * r + x * x;
  if (denom == 0.0) {
    throw ValidationError("line " + std::to_string(from) + "-" + std::to_string(to) +
                          " has zero impedance");
  }
  return Line{from, to, r / denom, -x / denom};
}

Index GridCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return static_cast<Index>(i);
  }
  throw UnknownBusReference("unknown bus id " + std::to_string(id));
}

const Bus& GridCase::slack() const {
  for (const auto& bus : buses) {
    if (bus.kind == BusKind::Slack) return bus;
  }
  throw ValidationError("case has no slack bus");
}

void validate_case(const GridCase& grid) {
  std::set<int> ids;
  int slack_count = 0;
  for (const auto& bus : grid.buses) {
    if (!ids.insert(bus.id).second) {
      throw ValidationError("duplicate bus id " + std::to_string(bus.id));
    }
    if (bus.kind == BusKind::Slack) ++slack_count;
  }
  if (slack_count != 1) {
    throw ValidationError("case must have exactly one slack bus, found " +
                          std::to_string(slack_count));
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& line : grid.lines) {
    if (!ids.count(line.from) || !ids.count(line.to)) {
      throw UnknownBusReference("line " + std::to_string(line.from) + "-" +
                                std::to_string(line.to) + " references an unknown bus");
    }
    if (line.from == line.to) {
      throw ValidationError("line " + std::to_string(line.from) + "-" +
                            std::to_string(line.to) + " is a self loop");
    }
    const auto key = std::minmax(line.from, line.to);
    if (!seen.insert(key).second) {
      throw DuplicateLine("duplicate line " + std::to_string(key.first) + "-" +
                          std::to_string(key.second));
    }
  }
}

AdmittanceMatrix build_admittance(const GridCase& grid) {
  const Index n = grid.size();
  AdmittanceMatrix y{DenseMatrix::Zero(n, n), DenseMatrix::Zero(n, n)};
  std::unordered_map<int, Index> index;
  for (Index i = 0; i < n; ++i) index.emplace(grid.buses[i].id, i);

  std::set<std::pair<int, int>> seen;
  for (const auto& line : grid.lines) {
    const auto kf = index.find(line.from);
    const auto kt = index.find(line.to);
    if (kf == index.end() || kt == index.end()) {
      throw UnknownBusReference("line " + std::to_string(line.from) + "-" +
                                std::to_string(line.to) + " references an unknown bus");
    }
    if (line.from == line.to) {
      throw ValidationError("self loop at bus " + std::to_string(line.from));
    }
    if (!seen.insert(std::minmax(line.from, line.to)).second) {
      throw DuplicateLine("duplicate line " + std::to_string(line.from) + "-" +
                          std::to_string(line.to));
    }
    const Index k = kf->second;
    const Index l = kt->second;
    y.g(k, l) -= line.g;
    y.g(l, k) -= line.g;
    y.b(k, l) -= line.b;
    y.b(l, k) -= line.b;
  }
  // Diagonal is the negated sum of the off-diagonal row entries.
  for (Index k = 0; k < n; ++k) {
    double gs = 0.0, bs = 0.0;
    for (Index l = 0; l < n; ++l) {
      if (l == k) continue;
      gs += y.g(k, l);
      bs += y.b(k, l);
    }
    y.g(k, k) = -gs;
    y.b(k, k) = -bs;
  }
  return y;
}

DenseVector flat_state(Index nodes) {
  DenseVector x = DenseVector::Zero(kStatesPerNode * nodes);
  for (Index k = 0; k < nodes; ++k) x(state_index(k, kVoltage)) = 1.0;
  return x;
}

}  // namespace dsse
