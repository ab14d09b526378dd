#include <doctest.h>

#include "dsse/aladin.hpp"
#include "dsse/central_oracle.hpp"
#include "test_support.hpp"

using namespace dsse;

namespace {

const Scenario& default_scenario() {
  static const Scenario s = make_scenario(test::bundled_case("ieee30"),
                                          test::bundled_partition("ieee30_default4"), NoiseConfig{}, 7);
  return s;
}

const AladinResult& default_run() {
  static const AladinResult r = [] {
    const Scenario& s = default_scenario();
    return run_aladin(s.problem, AladinConfig{}, flat_start(s.partition),
                      DenseVector::Zero(s.problem.coupling_rows()), &s.truth_regions);
  }();
  return r;
}

// Partition with the given combined node counts and pair count; only the
// sizes matter to the formulas.
Partition sized_partition(const std::vector<int>& nodes, int pairs) {
  Partition p;
  for (int n : nodes) {
    RegionDescriptor r;
    for (int k = 0; k < n; ++k) r.fragment.buses.push_back(Bus{k + 1});
    p.regions.push_back(r);
  }
  p.aux_pairs.resize(pairs);
  return p;
}

}  // namespace

TEST_CASE("communication formulas") {
  const CommCounts one = comm_counts(sized_partition({1}, 0));
  CHECK(one.upload == 22);
  REQUIRE(one.download.size() == 1);
  CHECK(one.download[0] == 4);

  const CommCounts four = comm_counts(sized_partition({10, 10, 10, 10}, 8));
  CHECK(four.upload == 6704);
  for (auto d : four.download) CHECK(d == 56);
  CHECK(four.total_download() == 224);
}

TEST_CASE("message payload sizes") {
  const Index n = 3;
  UploadMessage up;
  up.packed_gauss_newton = pack_symmetric(DenseMatrix::Identity(4 * n, 4 * n));
  up.constraint_jacobian = DenseMatrix::Zero(2 * n, 4 * n);
  up.gradient = DenseVector::Zero(4 * n);
  up.coupled_state = DenseVector::Zero(2 * 5);
  CHECK(up.float_count() == static_cast<std::size_t>(6 * n + 16 * n * n + 2 * 5));
  DownloadMessage down{DenseVector::Zero(10), DenseVector::Zero(4 * n)};
  CHECK(down.float_count() == 10 + 4 * n);
}

TEST_CASE("symmetric packing round trip") {
  DenseMatrix m = DenseMatrix::Random(6, 6);
  m = (m + m.transpose()).eval();
  const DenseVector packed = pack_symmetric(m);
  CHECK(packed.size() == 21);
  CHECK(unpack_symmetric(packed, 6) == m);
}

TEST_CASE("default run terminates with both conditions met") {
  const AladinResult& r = default_run();
  REQUIRE(r.converged);
  const IterationRecord& last = r.history.back();
  CHECK(last.consensus_violation <= 1e-4);
  CHECK(last.step_norm <= 1e-4);
  CHECK(last.state_error <= 1e-2);
  const auto& problem = default_scenario().problem;
  CHECK(coupling_residual(problem.coupling, r.z).cwiseAbs().maxCoeff() == last.consensus_violation);
  for (std::size_t k = 0; k + 1 < r.history.size(); ++k) {
    CHECK((r.history[k].consensus_violation > 1e-4 || r.history[k].step_norm > 1e-4));
  }
}

TEST_CASE("measured communication agrees with the formulas") {
  const AladinResult& r = default_run();
  const CommCounts formula = comm_counts(default_scenario().partition);
  CHECK(formula.upload == comm_counts(default_scenario().problem).upload);
  REQUIRE(r.comm.records.size() == r.history.size());
  for (const auto& rec : r.comm.records) {
    CHECK(rec.upload_formula == formula.upload);
    CHECK(rec.upload_delta() == 0);
    if (rec.download_phase) CHECK(rec.download_delta() == 0);
  }
  CHECK_FALSE(r.comm.records.back().download_phase);
  CHECK(r.comm.records.back().download_actual == 0);
}

TEST_CASE("restart at the converged point is a fixed point") {
  const Scenario& s = default_scenario();
  const AladinResult& first = default_run();
  AladinConfig cfg;
  cfg.epsilon = 1e-9;
  const AladinResult tight = run_aladin(s.problem, cfg, first.z, first.lambda);
  REQUIRE(tight.converged);
  const AladinResult again = run_aladin(s.problem, cfg, tight.z, tight.lambda);
  CHECK(again.converged);
  CHECK(again.history.size() == 1);
  CHECK(again.history.front().step_norm <= 1e-9);
  CHECK(again.comm.records.size() == 1);
}

TEST_CASE("single region reproduces the central solution") {
  const GridCase grid = test::bundled_case("case14");
  const Scenario s = make_scenario(grid, single_region(grid), NoiseConfig{}, 3);
  AladinConfig cfg;
  cfg.epsilon = 1e-10;
  const AladinResult r = run_aladin(s.problem, cfg, flat_start(s.partition), DenseVector(0));
  REQUIRE(r.converged);
  const CentralSolution central = solve_central(grid, s.measurements);
  const DenseVector est = gather_original(s.partition, grid, r.z);
  CHECK((est - central.state).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("iterations are deterministic across threads") {
  const Scenario& s = default_scenario();
  AladinConfig serial;
  serial.parallel = false;
  const AladinResult r = run_aladin(s.problem, serial, flat_start(s.partition),
                                    DenseVector::Zero(s.problem.coupling_rows()), &s.truth_regions);
  const AladinResult& p = default_run();
  REQUIRE(r.history.size() == p.history.size());
  for (std::size_t k = 0; k < r.history.size(); ++k) {
    CHECK(r.history[k].consensus_violation == p.history[k].consensus_violation);
    CHECK(r.history[k].objective == p.history[k].objective);
  }
  for (std::size_t i = 0; i < r.z.size(); ++i) CHECK(r.z[i] == p.z[i]);
}

TEST_CASE("iteration cap flags a non-converged run") {
  const Scenario& s = default_scenario();
  AladinConfig cfg;
  cfg.max_outer = 1;
  const AladinResult r = run_aladin(s.problem, cfg, flat_start(s.partition),
                                    DenseVector::Zero(s.problem.coupling_rows()));
  CHECK_FALSE(r.converged);
  CHECK(r.history.size() == 1);
  CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("inner failure ends the run with a diagnostic") {
  const Scenario& s = default_scenario();
  AladinConfig cfg;
  cfg.inner.max_iterations = 0;
  const AladinResult r = run_aladin(s.problem, cfg, flat_start(s.partition),
                                    DenseVector::Zero(s.problem.coupling_rows()));
  CHECK_FALSE(r.converged);
  CHECK(r.diagnostic.find("iteration 1") != std::string::npos);
}

TEST_CASE("configuration validation") {
  AladinConfig cfg;
  cfg.rho = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = AladinConfig{};
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  const Scenario& s = default_scenario();
  CHECK_THROWS_AS(run_aladin(s.problem, AladinConfig{}, flat_start(s.partition), DenseVector::Zero(3)),
                  DimensionMismatch);
}
