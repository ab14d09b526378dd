#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "dsse/cli.hpp"
#include "dsse/io.hpp"

using namespace dsse;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli_main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dsse_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("estimate writes a history and exits 0") {
  const fs::path dir = scratch("estimate");
  const Run r = run({"estimate", "--case", "ieee30", "--partition", "default4", "--seed", "7", "--out",
                     dir.string()});
  INFO(r.err);
  CHECK(r.code == kExitOk);
  REQUIRE(fs::exists(dir / "aladin_history.csv"));
  const std::string history = read_text_file(dir / "aladin_history.csv");
  CHECK(history.find("seed: 7") != std::string::npos);
  CHECK(history.find(kToolVersion) != std::string::npos);
  const auto lines = data_lines(history);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0].rfind("method,k,", 0) == 0);
  CHECK(lines[1].rfind("aladin,1,", 0) == 0);
  CHECK(fs::exists(dir / "aladin_summary.yaml"));
  CHECK(fs::exists(dir / "aladin_comm.csv"));
  CHECK(fs::exists(dir / "aladin_state.csv"));
}

TEST_CASE("missing case exits 2") {
  const Run r = run({"estimate", "--case", "/nonexistent/grid.yaml", "--out", scratch("missing").string()});
  CHECK(r.code == kExitInputError);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"estimate", "--no-such-flag"}).code == kExitInputError);
  CHECK(run({}).code == kExitInputError);
}

TEST_CASE("iteration cap exits 1") {
  const Run r = run({"estimate", "--max-iter", "1", "--out", scratch("cap").string()});
  CHECK(r.code == kExitNotConverged);
}

TEST_CASE("compare has a method column with one row per iteration per method") {
  const fs::path dir = scratch("compare");
  const Run r = run({"compare", "--seed", "7", "--max-iter", "30", "--out", dir.string()});
  INFO(r.err);
  CHECK(r.code == kExitOk);
  const auto lines = data_lines(read_text_file(dir / "compare.csv"));
  REQUIRE(!lines.empty());
  CHECK(lines[0].rfind("method,k,", 0) == 0);
  int aladin = 0, admm = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    aladin += lines[i].rfind("aladin,", 0) == 0;
    admm += lines[i].rfind("admm,", 0) == 0;
  }
  CHECK(aladin >= 1);
  CHECK(admm == 30);
  CHECK(aladin + admm == static_cast<int>(lines.size()) - 1);
}

TEST_CASE("simulate then estimate from the measurement file") {
  const fs::path dir = scratch("simulate");
  REQUIRE(run({"simulate", "--seed", "3", "--out", dir.string()}).code == kExitOk);
  REQUIRE(fs::exists(dir / "measurements.yaml"));
  const MeasurementSet set = parse_measurements(dir / "measurements.yaml");
  CHECK(set.seed == 3);
  const Run r = run({"estimate", "--measurements", (dir / "measurements.yaml").string(), "--out",
                     dir.string()});
  CHECK(r.code == kExitOk);
}

TEST_CASE("posterior prints the table") {
  const fs::path dir = scratch("posterior");
  const Run r = run({"posterior", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("Bus#") != std::string::npos);
  CHECK(r.out.find("AVG") != std::string::npos);
  CHECK(fs::exists(dir / "posterior.csv"));
}

TEST_CASE("check runs the derivative suite") {
  const Run r = run({"check"});
  INFO(r.out, r.err);
  CHECK(r.code == kExitOk);
}
