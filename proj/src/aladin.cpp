#include "dsse/aladin.hpp"

#include <future>

namespace dsse {
namespace {

// Counts payload floats crossing the region/coordinator boundary per iteration.
class CountingChannel {
 public:
  void begin_iteration(int iteration) {
    current_ = CommRecord{};
    current_.iteration = iteration;
  }
  const UploadMessage& upload(const UploadMessage& msg) {
    current_.upload_actual += msg.float_count();
    return msg;
  }
  const DownloadMessage& download(const DownloadMessage& msg) {
    current_.download_actual += msg.float_count();
    current_.download_phase = true;
    return msg;
  }
  const CommRecord& current() const { return current_; }

 private:
  CommRecord current_;
};

class RegionWorker {
 public:
  RegionWorker(std::shared_ptr<const RegionModel> model, DenseMatrix coupling, DenseVector z,
               DenseVector lambda, double rho, SqpOptions options)
      : model_(std::move(model)),
        coupling_(std::move(coupling)),
        z_(std::move(z)),
        lambda_(std::move(lambda)),
        rho_(rho),
        options_(options) {}

  UploadMessage parallel_step() {
    const LocalProblem problem{model_, coupling_, rho_, lambda_, z_};
    const LocalSolution local = solve_local(problem, options_);
    y_ = local.y;
    UploadMessage msg;
    msg.packed_gauss_newton =
        pack_symmetric(local.residual_jacobian.transpose() * local.residual_jacobian);
    msg.constraint_jacobian = local.constraint_jacobian;
    msg.gradient = local.residual_jacobian.transpose() * local.residual;
    msg.coupled_state = coupling_ * y_;
    msg.step_norm = linalg::max_abs(DenseVector(y_ - z_));
    msg.objective = local.residual.squaredNorm();
    msg.inner_iterations = local.inner_iterations;
    return msg;
  }

  void receive(const DownloadMessage& msg) {
    z_ = y_ + msg.step;
    lambda_ = msg.dual;
  }

  const DenseVector& y() const { return y_; }
  const DenseVector& z() const { return z_; }
  const DenseVector& lambda() const { return lambda_; }
  const DenseMatrix& coupling() const { return coupling_; }

 private:
  std::shared_ptr<const RegionModel> model_;
  DenseMatrix coupling_;
  DenseVector z_;
  DenseVector y_;
  DenseVector lambda_;
  double rho_;
  SqpOptions options_;
};

std::size_t formula_upload(const std::vector<std::size_t>& nodes, std::size_t pairs) {
  std::size_t total = 0;
  for (std::size_t n : nodes) total += 6 * n + 16 * n * n + 2 * pairs;
  return total;
}

CommCounts formula_counts(const std::vector<std::size_t>& nodes, std::size_t pairs) {
  CommCounts counts;
  counts.upload = formula_upload(nodes, pairs);
  for (std::size_t n : nodes) counts.download.push_back(2 * pairs + 4 * n);
  return counts;
}

}  // namespace

void AladinConfig::validate() const {
  if (!(rho > 0.0)) throw ValidationError("ALADIN: rho must be positive");
  if (!(epsilon > 0.0)) throw ValidationError("ALADIN: epsilon must be positive");
  if (max_outer < 1) throw ValidationError("ALADIN: max_outer must be at least 1");
}

std::size_t CommCounts::total_download() const {
  std::size_t total = 0;
  for (std::size_t d : download) total += d;
  return total;
}

CommCounts comm_counts(const Partition& partition) {
  std::vector<std::size_t> nodes;
  for (const auto& region : partition.regions) nodes.push_back(region.node_count());
  return formula_counts(nodes, partition.aux_pairs.size());
}

CommCounts comm_counts(const DistributedProblem& problem) {
  std::vector<std::size_t> nodes;
  for (const auto& region : problem.regions) {
    nodes.push_back(static_cast<std::size_t>(region->dimension() / kStatesPerNode));
  }
  return formula_counts(nodes, static_cast<std::size_t>(problem.coupling_rows() / 2));
}

CommLog measured_comm(const std::vector<IterationRecord>& history, const CommCounts& formula) {
  CommLog log;
  for (const auto& rec : history) {
    CommRecord r;
    r.iteration = rec.iteration;
    r.upload_formula = formula.upload;
    r.upload_actual = rec.upload_floats;
    r.download_formula = formula.total_download();
    r.download_actual = rec.download_floats;
    r.download_phase = rec.download_floats > 0;
    log.records.push_back(r);
  }
  return log;
}

std::size_t UploadMessage::float_count() const {
  return static_cast<std::size_t>(packed_gauss_newton.size() + constraint_jacobian.size() +
                                  gradient.size() + coupled_state.size());
}

std::size_t DownloadMessage::float_count() const {
  return static_cast<std::size_t>(dual.size() + step.size());
}

DenseVector pack_symmetric(const DenseMatrix& m) {
  const Index n = m.rows();
  DenseVector packed(n * (n + 1) / 2);
  Index pos = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) packed(pos++) = m(i, j);
  }
  return packed;
}

DenseMatrix unpack_symmetric(const DenseVector& packed, Index n) {
  if (packed.size() != n * (n + 1) / 2) throw DimensionMismatch("unpack_symmetric: size");
  DenseMatrix m(n, n);
  Index pos = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      m(i, j) = packed(pos);
      m(j, i) = packed(pos);
      ++pos;
    }
  }
  return m;
}

AladinResult run_aladin(const DistributedProblem& problem, const AladinConfig& config,
                        RegionStates z0, DenseVector lambda0, const RegionStates* truth) {
  config.validate();
  problem.validate();
  const std::size_t regions = problem.regions.size();
  if (z0.size() != regions) throw DimensionMismatch("run_aladin: initial guess region count");
  if (lambda0.size() != problem.coupling_rows()) {
    throw DimensionMismatch("run_aladin: lambda has " + std::to_string(lambda0.size()) +
                            " entries, expected " + std::to_string(problem.coupling_rows()));
  }
  if (truth != nullptr && truth->size() != regions) {
    throw DimensionMismatch("run_aladin: truth region count");
  }

  std::vector<RegionWorker> workers;
  for (std::size_t i = 0; i < regions; ++i) {
    workers.emplace_back(problem.regions[i], problem.coupling[i], std::move(z0[i]), lambda0,
                         config.rho, config.inner);
  }

  const CommCounts formula = comm_counts(problem);
  CountingChannel channel;
  AladinResult result;
  result.lambda = std::move(lambda0);

  for (int k = 1; k <= config.max_outer; ++k) {
    channel.begin_iteration(k);

    // Parallelizable step.
    std::vector<UploadMessage> uploads(regions);
    try {
      if (config.parallel && regions > 1) {
        std::vector<std::future<UploadMessage>> futures;
        for (auto& worker : workers) {
          futures.push_back(std::async(std::launch::async, [&worker] { return worker.parallel_step(); }));
        }
        for (auto& f : futures) f.wait();
        for (std::size_t i = 0; i < regions; ++i) uploads[i] = futures[i].get();
      } else {
        for (std::size_t i = 0; i < regions; ++i) uploads[i] = workers[i].parallel_step();
      }
    } catch (const InnerDiverged& e) {
      result.diagnostic = std::string("iteration ") + std::to_string(k) + ": " + e.what();
      break;
    }

    IterationRecord rec;
    rec.iteration = k;
    DenseVector coupled = DenseVector::Zero(problem.coupling_rows());
    for (std::size_t i = 0; i < regions; ++i) {
      const UploadMessage& msg = channel.upload(uploads[i]);
      coupled += msg.coupled_state;
      rec.step_norm = std::max(rec.step_norm, msg.step_norm);
      rec.objective += msg.objective;
      rec.inner_iterations.push_back(msg.inner_iterations);
    }
    rec.consensus_violation = linalg::max_abs(coupled);
    if (truth != nullptr) {
      double err = 0.0;
      for (std::size_t i = 0; i < regions; ++i) {
        err = std::max(err, linalg::max_abs(DenseVector(workers[i].y() - (*truth)[i])));
      }
      rec.state_error = err;
    }

    // Termination check.
    const bool done = rec.consensus_violation <= config.epsilon && rec.step_norm <= config.epsilon;
    if (!done) {
      // Consensus step.
      ConsensusQP qp;
      for (std::size_t i = 0; i < regions; ++i) {
        const Index n = uploads[i].gradient.size();
        qp.gauss_newton.push_back(unpack_symmetric(uploads[i].packed_gauss_newton, n));
        qp.gradient.push_back(uploads[i].gradient);
        qp.constraint_jacobian.push_back(uploads[i].constraint_jacobian);
        qp.coupling.push_back(workers[i].coupling());
      }
      qp.coupling_residual = coupled;
      ConsensusSolution sol;
      try {
        sol = solve_consensus(qp);
      } catch (const SingularKkt& e) {
        result.diagnostic = std::string("iteration ") + std::to_string(k) + ": " + e.what();
        result.history.push_back(rec);
        break;
      }
      rec.regularized = sol.regularized;
      for (std::size_t i = 0; i < regions; ++i) {
        workers[i].receive(channel.download(DownloadMessage{sol.coupling_multipliers, sol.step[i]}));
      }
      result.lambda = sol.coupling_multipliers;
    }

    const CommRecord& comm = channel.current();
    rec.upload_floats = comm.upload_actual;
    rec.download_floats = comm.download_actual;
    CommRecord logged = comm;
    logged.upload_formula = formula.upload;
    logged.download_formula = formula.total_download();
    result.comm.records.push_back(logged);
    result.history.push_back(rec);
    if (done) {
      result.converged = true;
      break;
    }
  }

  for (const auto& worker : workers) {
    result.z.push_back(worker.y().size() > 0 ? worker.y() : worker.z());
  }
  if (!result.converged && result.diagnostic.empty()) {
    result.diagnostic = "maximum number of outer iterations (" + std::to_string(config.max_outer) +
                        ") exceeded";
  }
  return result;
}

}  // namespace dsse
