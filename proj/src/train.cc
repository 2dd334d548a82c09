#include "relu_prism/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "relu_prism/error.h"

namespace relu_prism {

namespace {

// Column-per-sample activations of a batch. preact[i] is layer i's
// preactivation; act[i] is the input to layer i (act[0] = X^T).
struct BatchPass {
  std::vector<Eigen::MatrixXd> preact;
  std::vector<Eigen::MatrixXd> act;
};

BatchPass run_batch(std::span<const Layer> layers, const Eigen::MatrixXd& features) {
  BatchPass pass;
  pass.act.push_back(features.transpose());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = layers[i].weight * pass.act.back();
    z.colwise() += layers[i].bias;
    if (i + 1 < layers.size()) pass.act.push_back(z.cwiseMax(0.0));
    pass.preact.push_back(std::move(z));
  }
  return pass;
}

double activity_scale(const TrainConfig& config, std::size_t batch, std::size_t units) {
  const double denom = config.activity_reduction == ActivityReduction::mean
                           ? static_cast<double>(batch * units)
                           : static_cast<double>(batch);
  return config.activity_reg_coeff / denom;
}

double batch_objective(std::span<const Layer> layers, const BatchPass& pass,
                       std::span<const int> targets, const TrainConfig& config) {
  const Eigen::MatrixXd& out = pass.preact.back();
  const auto batch = static_cast<std::size_t>(out.cols());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch; ++j) loss += bce_with_logits(out(0, j), targets[j]);
  loss /= static_cast<double>(batch);
  if (config.activity_reg_coeff > 0.0) {
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
      if (!config.regularizes(i)) continue;
      const Eigen::MatrixXd& a = pass.act[i + 1];
      const double s = activity_scale(config, batch, a.rows());
      loss += s * (config.activity_norm == ActivityNorm::l1 ? a.cwiseAbs().sum() : a.squaredNorm());
    }
  }
  return loss;
}

void check_scalar(const Network& net) {
  if (net.output_dim() != 1) {
    throw UnsupportedShapeError(
        fmt::format("training needs a scalar output, network has {} outputs", net.output_dim()));
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = m.row(idx[i]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (hidden_widths.empty()) throw InvalidInputError("hidden_widths must not be empty");
  for (auto w : hidden_widths)
    if (w == 0) throw InvalidInputError("hidden widths must be positive");
  if (!(learning_rate > 0.0)) throw InvalidInputError("learning rate must be > 0");
  if (epochs < 1) throw InvalidInputError("epochs must be >= 1");
  if (batch_size < 1) throw InvalidInputError("batch size must be >= 1");
  if (!(activity_reg_coeff >= 0.0) || !std::isfinite(activity_reg_coeff)) {
    throw InvalidInputError("activity regularization coefficient must be finite and >= 0");
  }
  for (auto l : regularized_layers)
    if (l >= hidden_widths.size())
      throw InvalidInputError(fmt::format("regularized layer {} does not exist", l));
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
      !(adam.epsilon > 0.0)) {
    throw InvalidInputError("Adam needs beta1, beta2 in [0, 1) and epsilon > 0");
  }
}

bool TrainConfig::regularizes(std::size_t hidden_layer) const {
  return regularized_layers.empty() ||
         std::find(regularized_layers.begin(), regularized_layers.end(), hidden_layer) !=
             regularized_layers.end();
}

double bce_with_logits(double z, int target) {
  return std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
}

Network init_network(std::size_t input_dim, const TrainConfig& config) {
  if (input_dim < 1) throw InvalidInputError("input dimension must be >= 1");
  config.validate();
  std::seed_seq seq{config.seed, std::uint64_t{1}};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), config.hidden_widths.begin(), config.hidden_widths.end());
  dims.push_back(1);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i], fan_out = dims[i + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (std::size_t r = 0; r < fan_out; ++r)
      for (std::size_t c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

LossGradient loss_and_gradient(const Network& net, const Eigen::MatrixXd& features,
                               std::span<const int> targets, const TrainConfig& config) {
  check_scalar(net);
  if (features.rows() == 0 || static_cast<std::size_t>(features.rows()) != targets.size()) {
    throw InvalidInputError("loss_and_gradient needs a non-empty batch with one target per row");
  }
  if (static_cast<std::size_t>(features.cols()) != net.input_dim()) {
    throw InvalidInputError(fmt::format("batch has {} features, network expects {}",
                                        features.cols(), net.input_dim()));
  }
  const auto layers = net.layers();
  const BatchPass pass = run_batch(layers, features);
  const auto batch = static_cast<std::size_t>(features.rows());

  LossGradient out{batch_objective(layers, pass, targets, config), {}};
  out.gradient.resize(layers.size());

  Eigen::MatrixXd delta(1, batch);
  for (std::size_t j = 0; j < batch; ++j)
    delta(0, j) = (sigmoid(pass.preact.back()(0, j)) - targets[j]) / static_cast<double>(batch);

  for (std::size_t i = layers.size(); i-- > 0;) {
    out.gradient[i].weight = delta * pass.act[i].transpose();
    out.gradient[i].bias = delta.rowwise().sum();
    if (i == 0) break;
    // Gradient flowing into hidden layer i-1's post-activation.
    Eigen::MatrixXd upstream = layers[i].weight.transpose() * delta;
    const Eigen::MatrixXd& a = pass.act[i];
    if (config.activity_reg_coeff > 0.0 && config.regularizes(i - 1)) {
      const double s = activity_scale(config, batch, a.rows());
      if (config.activity_norm == ActivityNorm::l1) {
        upstream += (a.array() > 0.0).cast<double>().matrix() * s;
      } else {
        upstream += 2.0 * s * a;
      }
    }
    delta = upstream.cwiseProduct((pass.preact[i - 1].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

double objective(const Network& net, const Dataset& data, const TrainConfig& config) {
  check_scalar(net);
  const BatchPass pass = run_batch(net.layers(), data.features);
  return batch_objective(net.layers(), pass, data.targets, config);
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.rows() == 0) throw InvalidInputError("accuracy of an empty dataset is undefined");
  check_scalar(net);
  if (data.dims() != net.input_dim()) {
    throw InvalidInputError(fmt::format("dataset has {} features, network expects {}",
                                        data.dims(), net.input_dim()));
  }
  const BatchPass pass = run_batch(net.layers(), data.features);
  const Eigen::MatrixXd& out = pass.preact.back();
  std::size_t correct = 0;
  for (std::size_t j = 0; j < data.rows(); ++j)
    correct += ((out(0, j) > 0.0 ? 1 : 0) == data.targets[j]) ? 1 : 0;
  return static_cast<double>(correct) / data.rows();
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
  config.validate();
  data.validate();

  Network net = init_network(data.dims(), config);
  std::vector<Layer> params(net.layers().begin(), net.layers().end());
  std::vector<Layer> m, v;
  for (const Layer& p : params) {
    m.push_back({Eigen::MatrixXd::Zero(p.weight.rows(), p.weight.cols()),
                 Eigen::VectorXd::Zero(p.bias.size())});
    v.push_back(m.back());
  }

  TrainResult result{net, {}, objective(net, data, config)};
  std::seed_seq seq{config.seed, std::uint64_t{2}};
  std::mt19937_64 shuffle_rng(seq);
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);

  const AdamConfig& adam = config.adam;
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      std::vector<int> targets;
      targets.reserve(idx.size());
      for (auto i : idx) targets.push_back(data.targets[i]);

      const LossGradient lg = loss_and_gradient(net, gather_rows(data.features, idx), targets, config);
      if (!std::isfinite(lg.loss)) {
        throw TrainingDivergedError(
            epoch, fmt::format("training diverged in epoch {}: loss is {}", epoch, lg.loss));
      }

      ++step;
      const double lr_t = config.learning_rate *
                          std::sqrt(1.0 - std::pow(adam.beta2, static_cast<double>(step))) /
                          (1.0 - std::pow(adam.beta1, static_cast<double>(step)));
      auto update = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
        mom = adam.beta1 * mom + (1.0 - adam.beta1) * grad;
        vel = adam.beta2 * vel + (1.0 - adam.beta2) * grad.cwiseAbs2();
        param.array() -= lr_t * mom.array() / (vel.array().sqrt() + adam.epsilon);
      };
      for (std::size_t l = 0; l < params.size(); ++l) {
        update(params[l].weight, m[l].weight, v[l].weight, lg.gradient[l].weight);
        update(params[l].bias, m[l].bias, v[l].bias, lg.gradient[l].bias);
      }
      try {
        net = Network(params);
      } catch (const InvalidInputError&) {
        throw TrainingDivergedError(
            epoch, fmt::format("training diverged in epoch {}: non-finite parameters", epoch));
      }
    }
    const double loss = objective(net, data, config);
    if (!std::isfinite(loss)) {
      throw TrainingDivergedError(epoch,
                                  fmt::format("training diverged in epoch {}: loss is {}", epoch, loss));
    }
    result.history.push_back({loss, accuracy(net, data)});
  }
  result.network = std::move(net);
  return result;
}

ActivityNorm parse_activity_norm(std::string_view name) {
  if (name == "l1") return ActivityNorm::l1;
  if (name == "l2") return ActivityNorm::l2;
  throw InvalidInputError(fmt::format("unknown activity norm '{}'", name));
}

ActivityReduction parse_activity_reduction(std::string_view name) {
  if (name == "mean") return ActivityReduction::mean;
  if (name == "sum") return ActivityReduction::sum;
  throw InvalidInputError(fmt::format("unknown activity reduction '{}'", name));
}

std::string_view to_string(ActivityNorm norm) { return norm == ActivityNorm::l1 ? "l1" : "l2"; }

std::string_view to_string(ActivityReduction reduction) {
  return reduction == ActivityReduction::mean ? "mean" : "sum";
}

}  // namespace relu_prism
