#include <doctest.h>

#include <filesystem>

#include "dsse/io.hpp"
#include "dsse/powerflow.hpp"
#include "test_support.hpp"

using namespace dsse;

namespace {

const char* kSmallCase = R"(name: small
base_mva: 100
buses:
  - {id: 1, kind: slack, v_setpoint: 1.02}
  - {id: 2, kind: pq, p_load: 0.3, q_load: 0.1}
lines:
  - {from: 1, to: 2, r: 0, x: 0.2}
)";

const char* kMatpower = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.0	0	135	1	1.05	0.95;
	2	1	20	10	0	5	1	1.0	0	135	1	1.05	0.95;
	3	1	30	5	0	0	1	1.0	0	135	1	1.05	0.95;
];
mpc.gen = [
	1	50	0	100	-100	1.01	100	1	200	0;
];
mpc.branch = [
	1	2	0.01	0.1	0.02	0	0	0	0	0	1	-360	360;
	2	3	0.02	0.2	0	0	0	0	0.98	0	1	-360	360;
	2	3	0.02	0.2	0	0	0	0	0	0	1	-360	360;
];
)";

}  // namespace

TEST_CASE("bundled cases load and round trip") {
  for (const char* name : {"ieee30", "case9", "case14"}) {
    const GridCase grid = test::bundled_case(name);
    validate_case(grid);
    CHECK(parse_case_string(emit_case(grid)) == grid);
  }
  const GridCase grid = test::bundled_case("ieee30");
  CHECK(grid.buses.size() == 30);
  CHECK(grid.lines.size() == 41);
  CHECK(std::count_if(grid.buses.begin(), grid.buses.end(),
                      [](const Bus& b) { return b.kind == BusKind::Slack; }) == 1);
}

TEST_CASE("impedance lines are converted to admittances") {
  const GridCase grid = parse_case_string(kSmallCase);
  REQUIRE(grid.lines.size() == 1);
  CHECK(grid.lines[0].g == 0.0);
  CHECK(grid.lines[0].b == doctest::Approx(-5.0));
  CHECK(grid.buses[0].v_setpoint == 1.02);
  CHECK(grid.buses[1].p_load == 0.3);
}

TEST_CASE("malformed records report their line") {
  const std::string broken = std::string(kSmallCase) + "  - {from: 2, to: [1, 2}\n";
  try {
    parse_case_string(broken, "broken.yaml");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
    CHECK(std::string(e.what()).find("broken.yaml:8") == 0);
  }
  const std::string unknown_key = std::string(kSmallCase) + "  - {from: 2, to: 1, r: 0.1, x: 0.1, tap: 2}\n";
  try {
    parse_case_string(unknown_key);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
    CHECK(std::string(e.what()).find("tap") != std::string::npos);
  }
}

TEST_CASE("shunt fields are rejected") {
  std::string text = kSmallCase;
  text.replace(text.find("q_load: 0.1}"), 12, "q_load: 0.1, bs: 0.19}");
  try {
    parse_case_string(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("shunt") != std::string::npos);
    CHECK(e.line() == 5);
  }
}

TEST_CASE("validation errors from case files") {
  std::string dup = kSmallCase;
  dup += "  - {from: 2, to: 1, g: 1, b: -2}\n";
  // Reference errors in files carry the location of the offending record.
  CHECK_THROWS_WITH_AS(parse_case_string(dup), "<case>:8:5: duplicate line 2-1", ParseError);
  std::string dangling = kSmallCase;
  dangling += "  - {from: 2, to: 5, g: 1, b: -2}\n";
  CHECK_THROWS_WITH_AS(parse_case_string(dangling), "<case>:8:5: line 2-5 references an unknown bus",
                       ParseError);
  CHECK_THROWS_AS(parse_case("/nonexistent/case.yaml"), InputError);
}

TEST_CASE("partition files round trip") {
  const RegionAssignment a = test::bundled_partition("ieee30_default4");
  CHECK(a.size() == 4);
  CHECK(parse_partition_string(emit_partition(a)) == a);
  CHECK_THROWS_AS(parse_partition_string("regions: {1: [1, x]}\n"), ParseError);
}

TEST_CASE("measurement files round trip bit for bit") {
  const GridCase grid = test::bundled_case("ieee30");
  const Partition partition = partition_grid(grid, test::bundled_partition("ieee30_default4"));
  const MeasurementSet set =
      simulate_measurements(grid, solve_power_flow(grid).state, partition, NoiseConfig{}, 11);
  const MeasurementSet back = parse_measurements_string(emit_measurements(set));
  CHECK(back.seed == 11);
  REQUIRE(back.nodal.size() == set.nodal.size());
  REQUIRE(back.lines.size() == set.lines.size());
  for (std::size_t i = 0; i < set.nodal.size(); ++i) {
    CHECK(back.nodal[i].bus == set.nodal[i].bus);
    CHECK(back.nodal[i].value == set.nodal[i].value);
    CHECK(back.nodal[i].weight == set.nodal[i].weight);
  }
  for (std::size_t i = 0; i < set.lines.size(); ++i) {
    CHECK(back.lines[i].from == set.lines[i].from);
    CHECK(back.lines[i].value == set.lines[i].value);
    CHECK(back.lines[i].weight == set.lines[i].weight);
  }
}

TEST_CASE("bus/branch tables convert with notes on dropped data") {
  std::vector<std::string> dropped;
  const GridCase grid = parse_matpower_string(kMatpower, "tiny", &dropped);
  validate_case(grid);
  CHECK(grid.buses.size() == 3);
  CHECK(grid.slack().id == 1);
  CHECK(grid.buses[0].p_gen == doctest::Approx(0.5));
  CHECK(grid.buses[0].v_setpoint == doctest::Approx(1.01));
  CHECK(grid.buses[1].p_load == doctest::Approx(0.2));
  // The two 2-3 branches merge into one with twice the admittance.
  REQUIRE(grid.lines.size() == 2);
  const Line single = Line::from_impedance(2, 3, 0.02, 0.2);
  CHECK(grid.lines[1].g == doctest::Approx(2.0 * single.g));
  CHECK(grid.lines[1].b == doctest::Approx(2.0 * single.b));
  CHECK(dropped.size() == 4);
  for (const char* note : {"bus shunts", "line charging", "tap ratios", "parallel branches"}) {
    CHECK(std::any_of(dropped.begin(), dropped.end(),
                      [&](const std::string& d) { return d.find(note) != std::string::npos; }));
  }
  CHECK_THROWS_AS(parse_matpower_string("mpc.bus = [ 1 3 0 ];", "x"), ParseError);
}

TEST_CASE("output helpers") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  const std::string header = output_header(7, 0xabcULL);
  CHECK(header.find("# ") == 0);
  CHECK(header.find("seed: 7") != std::string::npos);
  CHECK(header.find(kToolVersion) != std::string::npos);

  IterationRecord rec;
  rec.iteration = 1;
  rec.inner_iterations = {3, 4};
  const std::string rows = history_csv_rows({rec}, "aladin");
  CHECK(rows.rfind("aladin,1,", 0) == 0);
  CHECK(history_csv_header(2).rfind("method,k,consensus_violation", 0) == 0);

  const GridCase grid = parse_case_string(kSmallCase);
  const std::string csv = state_csv(grid, flat_state(2));
  CHECK(csv.find("bus,theta,v,p,q\n1,0,1,0,0\n") != std::string::npos);
}

TEST_CASE("text file helpers") {
  const auto path = std::filesystem::temp_directory_path() / "dsse_io_test.txt";
  write_text_file(path, "hello\n");
  CHECK(read_text_file(path) == "hello\n");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_text_file(path), InputError);
}
