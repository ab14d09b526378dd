#include "dsse/cli.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "dsse/admm.hpp"
#include "dsse/aladin.hpp"
#include "dsse/format.hpp"
#include "dsse/io.hpp"
#include "dsse/posterior.hpp"
#include "dsse/scenario.hpp"

namespace dsse {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string case_arg = "ieee30";
  std::string partition_arg = "default4";
  std::string measurements;
  std::uint64_t seed = 1;
  std::string noise = "relative";
  double rho = 1e4;
  double eps = 1e-4;
  int max_iter = 0;  // 0: method default
  std::string out = ".";
  std::vector<int> buses{1, 8, 13, 20, 30};
  std::string input;
};

NoiseConfig noise_from(const std::string& mode) {
  NoiseConfig noise;
  if (mode == "relative") return noise;
  if (mode == "absolute") {
    noise.relative = false;
    return noise;
  }
  if (mode == "none") return NoiseConfig::none();
  throw InputError("--noise must be relative, absolute or none, got '" + mode + "'");
}

std::string config_text(const Options& o, const std::string& command) {
  std::ostringstream s;
  s << command << '|' << o.case_arg << '|' << o.partition_arg << '|' << o.measurements << '|'
    << o.seed << '|' << o.noise << '|' << format_double(o.rho) << '|' << format_double(o.eps) << '|'
    << o.max_iter;
  return s.str();
}

std::string header(const Options& o, const std::string& command) {
  return output_header(o.seed, fnv1a(config_text(o, command)));
}

Scenario load_scenario(const Options& o) {
  GridCase grid = parse_case(resolve_case_path(o.case_arg));
  const RegionAssignment assignment = resolve_partition(o.partition_arg, grid, o.case_arg);
  if (!o.measurements.empty()) {
    return make_scenario(std::move(grid), assignment, parse_measurements(o.measurements));
  }
  return make_scenario(std::move(grid), assignment, noise_from(o.noise), o.seed);
}

void check_positive(const Options& o) {
  if (!(o.rho > 0.0)) throw InputError("--rho must be positive");
  if (!(o.eps > 0.0)) throw InputError("--eps must be positive");
  if (o.max_iter < 0) throw InputError("--max-iter must be positive");
}

RunSummary summarize(const std::string& method, const Options& o, const Scenario& s,
                     const std::vector<IterationRecord>& history, bool converged,
                     const std::string& diagnostic) {
  RunSummary summary;
  summary.method = method;
  summary.case_name = s.grid.name;
  summary.regions = s.partition.region_count();
  summary.aux_pairs = static_cast<Index>(s.partition.aux_pairs.size());
  summary.seed = o.seed;
  summary.rho = o.rho;
  summary.tolerance = o.eps;
  summary.converged = converged;
  summary.iterations = static_cast<int>(history.size());
  if (!history.empty()) {
    summary.consensus_violation = history.back().consensus_violation;
    summary.step_norm = history.back().step_norm;
    summary.objective = history.back().objective;
    summary.state_error = history.back().state_error;
  }
  summary.diagnostic = diagnostic;
  return summary;
}

AladinResult aladin_run(const Options& o, const Scenario& s) {
  AladinConfig cfg;
  cfg.rho = o.rho;
  cfg.epsilon = o.eps;
  if (o.max_iter > 0) cfg.max_outer = o.max_iter;
  return run_aladin(s.problem, cfg, flat_start(s.partition),
                    DenseVector::Zero(s.problem.coupling_rows()), &s.truth_regions);
}

AdmmResult admm_run(const Options& o, const Scenario& s) {
  AdmmConfig cfg;
  cfg.rho = o.rho;
  cfg.tolerance = o.eps;
  if (o.max_iter > 0) cfg.max_outer = o.max_iter;
  return run_admm(s.problem, cfg, flat_start(s.partition),
                  DenseVector::Zero(s.problem.coupling_rows()), &s.truth_regions);
}

void report_run(std::ostream& out, const std::string& method, bool converged, std::size_t iterations,
                const std::vector<IterationRecord>& history) {
  out << method << ": " << (converged ? "converged" : "not converged") << " after " << iterations
      << " iterations";
  if (!history.empty()) out << ", consensus violation " << history.back().consensus_violation;
  out << '\n';
}

int cmd_simulate(const Options& o, std::ostream& out) {
  GridCase grid = parse_case(resolve_case_path(o.case_arg));
  const RegionAssignment assignment = resolve_partition(o.partition_arg, grid, o.case_arg);
  const Scenario s = make_scenario(std::move(grid), assignment, noise_from(o.noise), o.seed);
  const std::string head = header(o, "simulate");
  write_text_file(fs::path(o.out) / "measurements.yaml", head + emit_measurements(s.measurements));
  write_text_file(fs::path(o.out) / "truth.csv", head + state_csv(s.grid, s.truth.state));
  out << "power flow converged in " << s.truth.iterations << " iterations; wrote "
      << s.measurements.nodal.size() << " nodal and " << s.measurements.lines.size()
      << " line measurements\n";
  return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  check_positive(o);
  const Scenario s = load_scenario(o);
  const AladinResult r = aladin_run(o, s);
  const std::string head = header(o, "estimate");
  const fs::path dir(o.out);
  write_text_file(dir / "aladin_history.csv",
                  head + history_csv_header(s.problem.regions.size()) + history_csv_rows(r.history, "aladin"));
  write_text_file(dir / "aladin_comm.csv", head + comm_csv(r.comm));
  write_text_file(dir / "aladin_state.csv",
                  head + state_csv(s.grid, gather_original(s.partition, s.grid, r.z)));
  write_text_file(dir / "aladin_summary.yaml",
                  head + emit_summary(summarize("aladin", o, s, r.history, r.converged, r.diagnostic)));
  report_run(out, "aladin", r.converged, r.history.size(), r.history);
  if (!r.converged) {
    err << "aladin: " << r.diagnostic << '\n';
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_admm(const Options& o, std::ostream& out, std::ostream& err) {
  check_positive(o);
  const Scenario s = load_scenario(o);
  const AdmmResult r = admm_run(o, s);
  const std::string head = header(o, "admm");
  const fs::path dir(o.out);
  write_text_file(dir / "admm_history.csv",
                  head + history_csv_header(s.problem.regions.size()) + history_csv_rows(r.history, "admm"));
  write_text_file(dir / "admm_summary.yaml",
                  head + emit_summary(summarize("admm", o, s, r.history, r.converged, r.diagnostic)));
  report_run(out, "admm", r.converged, r.history.size(), r.history);
  if (!r.converged) {
    err << "admm: " << r.diagnostic << '\n';
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  check_positive(o);
  const Scenario s = load_scenario(o);
  const AladinResult a = aladin_run(o, s);
  const AdmmResult b = admm_run(o, s);
  write_text_file(fs::path(o.out) / "compare.csv",
                  header(o, "compare") + history_csv_header(s.problem.regions.size()) +
                      history_csv_rows(a.history, "aladin") + history_csv_rows(b.history, "admm"));
  report_run(out, "aladin", a.converged, a.history.size(), a.history);
  report_run(out, "admm", b.converged, b.history.size(), b.history);
  if (!b.converged) err << "admm: " << b.diagnostic << '\n';
  if (!a.converged) {
    err << "aladin: " << a.diagnostic << '\n';
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_posterior(const Options& o, std::ostream& out, std::ostream& err) {
  check_positive(o);
  const Scenario s = load_scenario(o);
  const AladinResult r = aladin_run(o, s);
  if (!r.converged) {
    err << "aladin: " << r.diagnostic << '\n';
    return kExitNotConverged;
  }
  const PosteriorReport report = compute_posterior(s.partition, s.grid, s.problem, r.z);
  std::vector<int> selected;
  for (int bus : o.buses) {
    for (const auto& b : s.grid.buses) {
      if (b.id == bus) selected.push_back(bus);
    }
  }
  const std::string table = render_table(report, selected);
  const std::string head = header(o, "posterior");
  write_text_file(fs::path(o.out) / "posterior.csv", head + posterior_csv(report));
  write_text_file(fs::path(o.out) / "posterior.txt", head + table);
  out << table;
  return kExitOk;
}

// Largest entrywise gap between an analytic Jacobian and central
// differences, relative to the largest finite-difference entry (at least 1).
double fd_gap(const std::function<DenseVector(const DenseVector&)>& f, const DenseMatrix& jac,
              const DenseVector& x) {
  DenseMatrix fd(jac.rows(), jac.cols());
  for (Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    DenseVector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    fd.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return linalg::max_abs(DenseMatrix(jac - fd)) / std::max(1.0, linalg::max_abs(fd));
}

DenseVector random_state(Index nodes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> theta(-0.3, 0.3), v(0.9, 1.1), pq(-1.0, 1.0);
  DenseVector x(kStatesPerNode * nodes);
  for (Index k = 0; k < nodes; ++k) {
    x(state_index(k, kTheta)) = theta(rng);
    x(state_index(k, kVoltage)) = v(rng);
    x(state_index(k, kActive)) = pq(rng);
    x(state_index(k, kReactive)) = pq(rng);
  }
  return x;
}

int cmd_check(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario(o);
  const AdmittanceMatrix y = build_admittance(s.grid);
  std::mt19937_64 rng(o.seed);
  bool ok = true;
  const auto line = [&](const std::string& name, bool pass, const std::string& detail) {
    out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    ok = ok && pass;
  };

  const double row_sum = std::max(linalg::max_abs(DenseVector(y.g.rowwise().sum())),
                                  linalg::max_abs(DenseVector(y.b.rowwise().sum())));
  line("admittance row sums", row_sum <= 1e-12, format_double(row_sum));

  const double pf = linalg::max_abs(power_flow_residual(s.truth.state, y));
  line("power flow residual at truth", pf <= 1e-10, format_double(pf) + " after " +
       std::to_string(s.truth.iterations) + " iterations");

  double worst_pf = 0.0, worst_line = 0.0, worst_region = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const DenseVector x = random_state(s.grid.size(), rng);
    worst_pf = std::max(worst_pf, fd_gap([&](const DenseVector& v) { return power_flow_residual(v, y); },
                                         jacobian_power_flow(x, y), x));
    const Line& l = s.grid.lines[trial % s.grid.lines.size()];
    const DenseVector pair = random_state(2, rng);
    const auto f = [&](const DenseVector& v) -> DenseVector {
      return measurement_line<double>(v.head<4>(), v.tail<4>(), l.g, l.b);
    };
    worst_line = std::max(worst_line, fd_gap(f, jacobian_measurement_line<double>(
                                                    pair.head<4>(), pair.tail<4>(), l.g, l.b),
                                             pair));
    const auto& region = s.problem.regions[trial % s.problem.regions.size()];
    const DenseVector z = random_state(region->dimension() / kStatesPerNode, rng);
    worst_region = std::max(worst_region, fd_gap([&](const DenseVector& v) { return region->residual(v); },
                                                 region->residual_jacobian(z), z));
  }
  line("power flow Jacobian vs finite differences", worst_pf <= 1e-6, format_double(worst_pf));
  line("line measurement Jacobian vs finite differences", worst_line <= 1e-6, format_double(worst_line));
  line("region residual Jacobian vs finite differences", worst_region <= 1e-6, format_double(worst_region));

  line("partition merge check", merge_check(s.partition, s.grid),
       std::to_string(s.partition.aux_pairs.size()) + " aux pairs");
  const double kernel = linalg::max_abs(coupling_residual(s.problem.coupling, s.truth_regions));
  line("consensus at restricted truth", kernel <= 1e-12, format_double(kernel));
  return ok ? kExitOk : kExitNotConverged;
}

int cmd_convert(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.input.empty()) throw InputError("convert needs --in");
  std::vector<std::string> dropped;
  const GridCase grid = parse_matpower(o.input, &dropped);
  for (const auto& note : dropped) err << "convert: ignored " << note << '\n';
  const fs::path target = o.out == "." ? fs::path(o.input).replace_extension(".yaml") : fs::path(o.out);
  write_text_file(target, emit_case(grid));
  out << "wrote " << target.string() << " (" << grid.size() << " buses, " << grid.lines.size()
      << " lines)\n";
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed AC power system state estimation"};
  app.require_subcommand(1);
  Options o;

  const auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--case", o.case_arg, "case file or bundled case name");
    cmd->add_option("--partition", o.partition_arg, "partition file, bundled name or 'single'");
    cmd->add_option("--seed", o.seed, "noise seed");
    cmd->add_option("--noise", o.noise, "relative, absolute or none");
    cmd->add_option("--out", o.out, "output directory");
  };
  const auto add_solver_options = [&](CLI::App* cmd) {
    add_run_options(cmd);
    cmd->add_option("--measurements", o.measurements, "measurement file (default: simulate)");
    cmd->add_option("--rho", o.rho, "penalty parameter");
    cmd->add_option("--eps", o.eps, "termination tolerance");
    cmd->add_option("--max-iter", o.max_iter, "outer iteration cap");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "power flow and noisy measurements");
  add_run_options(simulate);
  CLI::App* estimate = app.add_subcommand("estimate", "distributed estimation with ALADIN");
  add_solver_options(estimate);
  CLI::App* admm = app.add_subcommand("admm", "distributed estimation with ADMM");
  add_solver_options(admm);
  CLI::App* compare = app.add_subcommand("compare", "ALADIN and ADMM side by side");
  add_solver_options(compare);
  CLI::App* posterior = app.add_subcommand("posterior", "a-posteriori standard deviations");
  add_solver_options(posterior);
  posterior->add_option("--buses", o.buses, "buses shown in the table");
  CLI::App* check = app.add_subcommand("check", "derivative and invariant checks");
  add_run_options(check);
  CLI::App* convert = app.add_subcommand("convert", "bus/branch table file to case file");
  convert->add_option("--in", o.input, "table file")->required();
  convert->add_option("--out", o.out, "case file to write");

  std::vector<std::string> storage{"dsse"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (estimate->parsed()) return cmd_estimate(o, out, err);
    if (admm->parsed()) return cmd_admm(o, out, err);
    if (compare->parsed()) return cmd_compare(o, out, err);
    if (posterior->parsed()) return cmd_posterior(o, out, err);
    if (check->parsed()) return cmd_check(o, out);
    if (convert->parsed()) return cmd_convert(o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitNotConverged;
  }
  return kExitInputError;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace dsse
