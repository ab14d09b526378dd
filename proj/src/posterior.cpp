#include "dsse/posterior.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "dsse/format.hpp"

namespace dsse {
namespace {

constexpr std::array<const char*, kStatesPerNode> kComponentNames{"theta", "v", "p", "q"};

DenseMatrix block_diagonal(const std::vector<DenseMatrix>& blocks) {
  Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  DenseMatrix out = DenseMatrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

std::string percent_cell(const ComponentPosterior& c) {
  char buf[48];
  if (c.reference) return "*";
  if (c.near_zero) {
    std::snprintf(buf, sizeof buf, "abs %.1e", c.absolute_std);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * c.relative_std);
  }
  return buf;
}

}  // namespace

DenseMatrix compute_covariance(const DenseMatrix& gauss_newton, const DenseMatrix& constraint_jacobian,
                               const DenseMatrix& coupling) {
  const Index n = gauss_newton.rows();
  if (gauss_newton.cols() != n || (constraint_jacobian.rows() > 0 && constraint_jacobian.cols() != n) ||
      (coupling.rows() > 0 && coupling.cols() != n)) {
    throw DimensionMismatch("compute_covariance: blocks do not conform");
  }
  const Index mc = constraint_jacobian.rows();
  const Index ma = coupling.rows();
  DenseMatrix border(mc + ma, n);
  if (mc > 0) border.topRows(mc) = constraint_jacobian;
  if (ma > 0) border.bottomRows(ma) = coupling;

  // The ridge fallback of the KKT factorization would hide exactly the
  // singularity this function has to report.
  std::optional<linalg::KktFactorization<double>> kkt;
  try {
    kkt.emplace(gauss_newton, border);
  } catch (const SingularKkt& e) {
    throw SingularBordered(std::string("posterior: bordered matrix is singular, some states are "
                                       "not identifiable: ") + e.what());
  }
  if (kkt->regularized()) {
    throw SingularBordered("posterior: bordered matrix is singular, some states are not identifiable");
  }
  DenseMatrix rhs = DenseMatrix::Zero(n + mc + ma, n);
  rhs.topRows(n).setIdentity();
  const DenseMatrix solved = kkt->solve_bordered(rhs);
  DenseMatrix cov = solved.topRows(n);
  return cov;
}

DenseMatrix distributed_covariance(const DistributedProblem& problem, const RegionStates& z) {
  problem.validate();
  if (z.size() != problem.regions.size()) throw DimensionMismatch("distributed_covariance: region count");
  std::vector<DenseMatrix> gn, cj;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const DenseMatrix b = problem.regions[i]->residual_jacobian(z[i]);
    gn.push_back(b.transpose() * b);
    cj.push_back(problem.regions[i]->constraint_jacobian(z[i]));
  }
  DenseMatrix coupling(problem.coupling_rows(), 0);
  for (const auto& a : problem.coupling) {
    DenseMatrix wider(coupling.rows(), coupling.cols() + a.cols());
    wider << coupling, a;
    coupling = std::move(wider);
  }
  return compute_covariance(block_diagonal(gn), block_diagonal(cj), coupling);
}

PosteriorReport report_from_covariance(const GridCase& grid, const DenseVector& state,
                                       const DenseMatrix& covariance) {
  const Index n = kStatesPerNode * grid.size();
  if (state.size() != n || covariance.rows() != n || covariance.cols() != n) {
    throw DimensionMismatch("posterior report: state or covariance does not match the case");
  }
  PosteriorReport report;
  const double scale = std::max(linalg::max_abs(covariance), 1e-300);
  report.symmetry_error = linalg::max_abs(DenseMatrix(covariance - covariance.transpose())) / scale;
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(0.5 * (covariance + covariance.transpose()),
                                                       Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  report.min_eigen_ratio = largest > 0.0 ? eig.eigenvalues().minCoeff() / largest : 0.0;

  const int reference = grid.slack().id;
  std::array<double, kStatesPerNode> sums{};
  for (Index k = 0; k < grid.size(); ++k) {
    BusPosterior bus;
    bus.bus = grid.buses[k].id;
    for (Index c = 0; c < kStatesPerNode; ++c) {
      const Index idx = kStatesPerNode * k + c;
      ComponentPosterior& comp = bus.components[c];
      comp.nominal = state(idx);
      comp.absolute_std = std::sqrt(std::max(covariance(idx, idx), 0.0));
      comp.reference = c == kTheta && bus.bus == reference;
      comp.near_zero = std::abs(comp.nominal) < kNominalFloor;
      if (!comp.near_zero) comp.relative_std = comp.absolute_std / std::abs(comp.nominal);
      if (comp.included()) {
        sums[c] += comp.relative_std;
        ++report.average_count[c];
      }
    }
    report.buses.push_back(bus);
  }
  for (Index c = 0; c < kStatesPerNode; ++c) {
    report.average_relative[c] =
        report.average_count[c] > 0 ? sums[c] / report.average_count[c] : 0.0;
  }
  return report;
}

PosteriorReport compute_posterior(const Partition& partition, const GridCase& original,
                                  const DistributedProblem& problem, const RegionStates& z) {
  const DenseMatrix cov = distributed_covariance(problem, z);
  // Map each original bus to its rows in the stacked region vector.
  std::vector<Index> offset(z.size() + 1, 0);
  for (std::size_t i = 0; i < z.size(); ++i) offset[i + 1] = offset[i] + z[i].size();
  std::vector<Index> rows(kStatesPerNode * original.size());
  for (Index r = 0; r < partition.region_count(); ++r) {
    const auto& region = partition.regions[r];
    for (int bus : region.original_nodes) {
      const Index global = original.bus_index(bus);
      const Index local = region.local_index(bus);
      for (Index c = 0; c < kStatesPerNode; ++c) {
        rows[kStatesPerNode * global + c] = offset[r] + kStatesPerNode * local + c;
      }
    }
  }
  const Index n = static_cast<Index>(rows.size());
  DenseMatrix restricted(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) restricted(a, b) = cov(rows[a], rows[b]);
  }
  PosteriorReport report = report_from_covariance(original, gather_original(partition, original, z), restricted);
  // Symmetry and definiteness are properties of the full block.
  const double scale = std::max(linalg::max_abs(cov), 1e-300);
  report.symmetry_error = linalg::max_abs(DenseMatrix(cov - cov.transpose())) / scale;
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(0.5 * (cov + cov.transpose()),
                                                       Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  report.min_eigen_ratio = largest > 0.0 ? eig.eigenvalues().minCoeff() / largest : 0.0;
  return report;
}

std::string render_table(const PosteriorReport& report, const std::vector<int>& selected_buses) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %12s %12s %12s %12s\n", "Bus#", "theta", "v", "p", "q");
  out << line;
  for (int id : selected_buses) {
    const BusPosterior* bus = nullptr;
    for (const auto& b : report.buses) {
      if (b.bus == id) bus = &b;
    }
    if (bus == nullptr) throw UnknownBusReference("render_table: no bus " + std::to_string(id));
    std::snprintf(line, sizeof line, "%-6d %12s %12s %12s %12s\n", id,
                  percent_cell(bus->components[0]).c_str(), percent_cell(bus->components[1]).c_str(),
                  percent_cell(bus->components[2]).c_str(), percent_cell(bus->components[3]).c_str());
    out << line;
  }
  std::array<std::string, kStatesPerNode> avg;
  for (Index c = 0; c < kStatesPerNode; ++c) {
    char cell[32];
    std::snprintf(cell, sizeof cell, "%.2f%%", 100.0 * report.average_relative[c]);
    avg[c] = report.average_count[c] > 0 ? cell : "*";
  }
  std::snprintf(line, sizeof line, "%-6s %12s %12s %12s %12s\n", "AVG", avg[0].c_str(),
                avg[1].c_str(), avg[2].c_str(), avg[3].c_str());
  out << line;
  return out.str();
}

std::string posterior_csv(const PosteriorReport& report) {
  std::ostringstream out;
  out << "bus,component,nominal,std_abs,std_rel,flag\n";
  for (const auto& bus : report.buses) {
    for (Index c = 0; c < kStatesPerNode; ++c) {
      const auto& comp = bus.components[c];
      const char* flag = comp.reference ? "reference" : comp.near_zero ? "near_zero" : "";
      out << bus.bus << ',' << kComponentNames[c] << ',' << format_double(comp.nominal) << ','
          << format_double(comp.absolute_std) << ','
          << (comp.near_zero ? std::string() : format_double(comp.relative_std)) << ',' << flag
          << '\n';
    }
  }
  return out.str();
}

}  // namespace dsse
