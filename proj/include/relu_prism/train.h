#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "relu_prism/dataset.h"
#include "relu_prism/network.h"

namespace relu_prism {

enum class ActivityNorm { l1, l2 };

// How the activity penalty of one hidden layer is reduced. Both modes average
// over the batch; `mean` also averages over the layer's units, `sum` adds them.
enum class ActivityReduction { mean, sum };

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

struct TrainConfig {
  std::vector<std::size_t> hidden_widths{4, 2};
  double learning_rate = 0.01;
  int epochs = 10;
  std::size_t batch_size = 100;
  double activity_reg_coeff = 0.02;
  ActivityNorm activity_norm = ActivityNorm::l1;
  ActivityReduction activity_reduction = ActivityReduction::mean;
  // 0-based hidden-layer indices that carry the penalty; empty means all.
  std::vector<std::size_t> regularized_layers;
  std::uint64_t seed = 1;
  AdamConfig adam;

  void validate() const;
  bool regularizes(std::size_t hidden_layer) const;
};

struct EpochStats {
  double loss;      // full-dataset objective after the epoch
  double accuracy;  // full-dataset accuracy after the epoch
};

using TrainHistory = std::vector<EpochStats>;

struct TrainResult {
  Network network;
  TrainHistory history;
  double initial_loss;
};

// log(1 + exp(z)) - t * z, i.e. the cross-entropy of sigmoid(z) against t,
// evaluated without overflow for any finite z.
double bce_with_logits(double z, int target);

// Glorot-uniform weights, zero biases, output width 1.
Network init_network(std::size_t input_dim, const TrainConfig& config);

// Mean cross-entropy plus the activity penalty over the given rows, and its
// gradient with respect to every weight and bias (same shapes as the layers).
struct LossGradient {
  double loss;
  std::vector<Layer> gradient;
};

LossGradient loss_and_gradient(const Network& net, const Eigen::MatrixXd& features,
                               std::span<const int> targets, const TrainConfig& config);

double objective(const Network& net, const Dataset& data, const TrainConfig& config);

// Mini-batch Adam on the regularized cross-entropy. Batches come from a
// seeded reshuffle every epoch. Throws TrainingDivergedError on a non-finite loss.
TrainResult train(const Dataset& data, const TrainConfig& config);

double accuracy(const Network& net, const Dataset& data);

ActivityNorm parse_activity_norm(std::string_view name);
ActivityReduction parse_activity_reduction(std::string_view name);
std::string_view to_string(ActivityNorm norm);
std::string_view to_string(ActivityReduction reduction);

}  // namespace relu_prism
