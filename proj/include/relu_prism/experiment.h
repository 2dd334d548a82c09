#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "relu_prism/affine.h"
#include "relu_prism/dataset.h"
#include "relu_prism/partition.h"
#include "relu_prism/train.h"

namespace relu_prism {

struct JacobianSummary {
  std::size_t checked = 0;
  std::size_t skipped_boundary = 0;
  double max_row_err = 0.0;
  double step = kDefaultJacobianStep;
  double tol = kDefaultJacobianTolerance;
  bool pass = true;
};

// jacobian_check over every distinct row of `inputs`; boundary rows are
// counted, not failed.
JacobianSummary jacobian_summary(const Network& net, const Eigen::MatrixXd& inputs,
                                 double step = kDefaultJacobianStep,
                                 double tol = kDefaultJacobianTolerance);

// Everything one train -> partition -> verify pass produces.
struct RunSummary {
  TrainConfig config;
  Network network;
  TrainHistory history;
  double initial_loss = 0.0;
  double train_accuracy = 0.0;
  double analyzed_accuracy = 0.0;
  std::vector<Cluster> clusters;
  AffineVerifyReport verify;
  JacobianSummary jacobian;

  bool has_all_inactive_cluster() const;
  bool verified() const { return verify.pass && jacobian.pass; }
};

// Trains on `train_data` and analyzes `analyzed` (often the same dataset).
RunSummary run_experiment(const Dataset& train_data, const Dataset& analyzed,
                          const TrainConfig& config, double affine_tol = kDefaultAffineTolerance);

// One run per seed, config.seed overridden. Runs execute concurrently; each is
// deterministic, and results come back in seed order.
std::vector<RunSummary> run_sweep(const Dataset& train_data, const Dataset& analyzed,
                                  const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
                                  double affine_tol = kDefaultAffineTolerance);

// Index of the run with the highest training accuracy; the earliest wins ties.
std::size_t best_run(const std::vector<RunSummary>& runs);

}  // namespace relu_prism
