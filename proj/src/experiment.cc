#include "relu_prism/experiment.h"

#include <algorithm>
#include <future>

#include "relu_prism/error.h"

namespace relu_prism {

namespace {

std::vector<Eigen::VectorXd> distinct_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows;
  rows.reserve(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.emplace_back(m.cols());
    Eigen::Map<Eigen::VectorXd>(rows.back().data(), m.cols()) = m.row(r).transpose();
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::vector<Eigen::VectorXd> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.emplace_back(Eigen::Map<Eigen::VectorXd>(r.data(), r.size()));
  return out;
}

}  // namespace

JacobianSummary jacobian_summary(const Network& net, const Eigen::MatrixXd& inputs, double step,
                                 double tol) {
  JacobianSummary summary;
  summary.step = step;
  summary.tol = tol;
  for (const auto& u : distinct_rows(inputs)) {
    const JacobianReport r = jacobian_check(net, u, step);
    if (r.outcome == JacobianOutcome::boundary) {
      ++summary.skipped_boundary;
      continue;
    }
    ++summary.checked;
    summary.max_row_err = std::max(summary.max_row_err, r.max_row_err);
  }
  summary.pass = summary.max_row_err <= tol;
  return summary;
}

bool RunSummary::has_all_inactive_cluster() const {
  return std::any_of(clusters.begin(), clusters.end(),
                     [](const Cluster& c) { return c.all_inactive(); });
}

RunSummary run_experiment(const Dataset& train_data, const Dataset& analyzed,
                          const TrainConfig& config, double affine_tol) {
  TrainResult trained = train(train_data, config);
  const Network& net = trained.network;
  return RunSummary{.config = config,
                    .network = net,
                    .history = std::move(trained.history),
                    .initial_loss = trained.initial_loss,
                    .train_accuracy = accuracy(net, train_data),
                    .analyzed_accuracy = accuracy(net, analyzed),
                    .clusters = partition(net, analyzed),
                    .verify = verify_affine(net, analyzed.features, affine_tol),
                    .jacobian = jacobian_summary(net, analyzed.features)};
}

std::vector<RunSummary> run_sweep(const Dataset& train_data, const Dataset& analyzed,
                                  const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
                                  double affine_tol) {
  if (seeds.empty()) throw InvalidInputError("a sweep needs at least one seed");
  std::vector<std::future<RunSummary>> pending;
  for (auto seed : seeds) {
    TrainConfig c = config;
    c.seed = seed;
    pending.push_back(std::async(std::launch::async, [&train_data, &analyzed, c, affine_tol] {
      return run_experiment(train_data, analyzed, c, affine_tol);
    }));
  }
  std::vector<RunSummary> runs;
  for (auto& f : pending) runs.push_back(f.get());
  return runs;
}

std::size_t best_run(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw InvalidInputError("no runs to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].train_accuracy > runs[best].train_accuracy) best = i;
  return best;
}

}  // namespace relu_prism
