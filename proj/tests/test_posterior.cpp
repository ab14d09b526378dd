#include <doctest.h>

#include "dsse/aladin.hpp"
#include "dsse/posterior.hpp"
#include "test_support.hpp"

using namespace dsse;

namespace {

struct Converged {
  Converged() {
    scenario = make_scenario(test::bundled_case("ieee30"), test::bundled_partition("ieee30_default4"),
                             NoiseConfig{}, 7);
    AladinConfig cfg;
    cfg.epsilon = 1e-8;
    z = run_aladin(scenario.problem, cfg, flat_start(scenario.partition),
                   DenseVector::Zero(scenario.problem.coupling_rows()))
            .z;
  }
  Scenario scenario;
  RegionStates z;
};

const Converged& converged() {
  static const Converged c;
  return c;
}

}  // namespace

TEST_CASE("scalar Fisher information") {
  const DenseMatrix cov = compute_covariance(DenseMatrix::Constant(1, 1, 1e4), DenseMatrix(0, 1),
                                             DenseMatrix(0, 1));
  CHECK(cov(0, 0) == doctest::Approx(1e-4));
  CHECK(std::sqrt(cov(0, 0)) == doctest::Approx(1e-2));
}

TEST_CASE("a pinned direction has zero variance") {
  const DenseMatrix cov =
      compute_covariance(DenseMatrix::Identity(2, 2), DenseMatrix{{1.0, 0.0}}, DenseMatrix(0, 2));
  CHECK(std::abs(cov(0, 0)) <= 1e-10);
  CHECK(cov(1, 1) == doctest::Approx(1.0));
  // Same through a coupling row.
  const DenseMatrix coupled =
      compute_covariance(DenseMatrix::Identity(2, 2), DenseMatrix(0, 2), DenseMatrix{{1.0, -1.0}});
  CHECK(coupled(0, 0) == doctest::Approx(0.5));
  CHECK(coupled(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("unidentifiable states are reported") {
  CHECK_THROWS_AS(compute_covariance(DenseMatrix{{1.0, 0.0}, {0.0, 0.0}}, DenseMatrix(0, 2),
                                     DenseMatrix(0, 2)),
                  SingularBordered);
  CHECK_THROWS_AS(compute_covariance(DenseMatrix::Identity(2, 2), DenseMatrix(1, 3), DenseMatrix(0, 2)),
                  DimensionMismatch);
}

TEST_CASE("30-bus covariance is symmetric and positive semidefinite") {
  const Converged& c = converged();
  const PosteriorReport report = compute_posterior(c.scenario.partition, c.scenario.grid,
                                                   c.scenario.problem, c.z);
  CHECK(report.symmetry_error <= 1e-8);
  CHECK(report.min_eigen_ratio >= -1e-8);
  CHECK(report.buses.size() == c.scenario.grid.buses.size());
  CHECK(report.average_relative[kVoltage] >= 2e-4);
  CHECK(report.average_relative[kVoltage] <= 1.7e-2);
  CHECK(report.buses.front().components[kTheta].reference);
}

TEST_CASE("variances scale inversely with the weights") {
  const Converged& c = converged();
  const DenseMatrix base = distributed_covariance(c.scenario.problem, c.z);
  const double factor = 7.5;
  const DistributedProblem scaled =
      make_grid_problem(c.scenario.partition, scale_weights(c.scenario.measurements, factor));
  const DenseMatrix cov = distributed_covariance(scaled, c.z);
  CHECK((cov * factor - base).diagonal().cwiseAbs().maxCoeff() <=
        1e-8 * base.diagonal().cwiseAbs().maxCoeff());
}

TEST_CASE("report flags and averages") {
  GridCase grid = test::two_bus_case();
  DenseVector state(8);
  state << 0.0, 1.0, 0.5, 1e-4, -0.1, 0.95, -0.5, -0.2;
  const DenseMatrix cov = (DenseVector(8) << 1e-6, 1e-6, 4e-4, 1e-8, 1e-6, 4e-6, 1e-4, 4e-4)
                              .finished()
                              .asDiagonal();
  const PosteriorReport report = report_from_covariance(grid, state, cov);
  CHECK(report.buses[0].components[kTheta].reference);
  CHECK(report.buses[0].components[kReactive].near_zero);
  CHECK(report.buses[0].components[kReactive].absolute_std == doctest::Approx(1e-4));
  CHECK(report.average_count[kTheta] == 1);
  CHECK(report.average_relative[kTheta] == doctest::Approx(1e-3 / 0.1));
  CHECK(report.average_count[kReactive] == 1);
  CHECK(report.average_relative[kVoltage] == doctest::Approx(0.5 * (1e-3 / 1.0 + 2e-3 / 0.95)));

  const std::string table = render_table(report, {1, 2});
  CHECK(table.rfind("Bus#", 0) == 0);
  CHECK(table.find("*") != std::string::npos);
  CHECK(table.find("abs 1.0e-04") != std::string::npos);
  CHECK(table.find("AVG") != std::string::npos);
  CHECK(table.find("10.00%") != std::string::npos);

  const std::string empty = render_table(report, {});
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 2);
  CHECK(empty.find("AVG") != std::string::npos);
  CHECK_THROWS_AS(render_table(report, {9}), UnknownBusReference);

  const std::string csv = posterior_csv(report);
  CHECK(csv.rfind("bus,component,nominal,std_abs,std_rel,flag\n", 0) == 0);
  CHECK(csv.find("1,theta,0,0.001,,reference") != std::string::npos);
  CHECK(csv.find("near_zero") != std::string::npos);
}
