#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace relu_prism {

// One affine layer x -> weight * x + bias. weight is (d_out x d_in).
struct Layer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

// A fully-connected feedforward network. Every layer except the last is
// followed by a ReLU; the last layer is affine and produces the logit, to
// which a sigmoid is attached only for prediction.
//
// Construction validates chained shapes and finiteness; the object is
// immutable afterwards.
class Network {
 public:
  explicit Network(std::vector<Layer> layers);

  std::span<const Layer> layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }

  // Number of affine layers, counting the output layer.
  std::size_t depth() const noexcept { return layers_.size(); }
  std::size_t input_dim() const noexcept { return layers_.front().weight.cols(); }
  std::size_t output_dim() const noexcept { return layers_.back().weight.rows(); }

  // Widths of the ReLU layers, input side first. Empty for a single affine layer.
  std::vector<std::size_t> hidden_widths() const;
  std::size_t hidden_unit_count() const;

 private:
  std::vector<Layer> layers_;
};

// Active/inactive state of every ReLU unit, one bit vector per hidden layer.
// Equality of patterns is the equivalence relation that defines the clusters.
class ActivationPattern {
 public:
  ActivationPattern() = default;
  explicit ActivationPattern(std::vector<std::vector<bool>> bits);

  // Pattern with every unit set to `active` for the given layer widths.
  static ActivationPattern uniform(std::span<const std::size_t> widths, bool active);
  // Parses the concatenated bitstring produced by key().
  static ActivationPattern from_key(const std::string& key,
                                    std::span<const std::size_t> widths);

  const std::vector<std::vector<bool>>& layers() const noexcept { return bits_; }
  std::size_t layer_count() const noexcept { return bits_.size(); }
  bool active(std::size_t layer, std::size_t unit) const { return bits_.at(layer).at(unit); }

  std::size_t total_bits() const;
  std::size_t active_count() const;
  bool all_inactive() const { return active_count() == 0; }

  // "0110..." over all hidden units, input-side layer first.
  std::string key() const;

  // True iff the layer widths agree with the network's hidden widths.
  bool matches(const Network& net) const;

  friend bool operator==(const ActivationPattern&, const ActivationPattern&) = default;

 private:
  std::vector<std::vector<bool>> bits_;
};

struct ForwardTrace {
  std::vector<Eigen::VectorXd> preactivations;  // one per layer, output layer last
  Eigen::VectorXd logit;
  Eigen::VectorXd probability;
  ActivationPattern pattern;
};

double sigmoid(double z);

// Full forward pass recording preactivations and the activation pattern.
// A unit is active iff its preactivation is strictly positive.
ForwardTrace forward_trace(const Network& net, const Eigen::VectorXd& u);

// Forward pass returning only the logit.
Eigen::VectorXd logit(const Network& net, const Eigen::VectorXd& u);

// Only the activation pattern of u.
ActivationPattern pattern_of(const Network& net, const Eigen::VectorXd& u);

// Class label for a scalar-output network: 1 iff logit > 0 (probability > 0.5).
int predict(const Network& net, const Eigen::VectorXd& u);

// {"layers": [{"w": [[...]], "b": [...]}, ...]}, row-major, input side first.
nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& doc);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

}  // namespace relu_prism
