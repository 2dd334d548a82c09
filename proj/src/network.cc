#include "relu_prism/network.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "relu_prism/error.h"

namespace relu_prism {

namespace {

bool all_finite(const Layer& layer) {
  return layer.weight.allFinite() && layer.bias.allFinite();
}

void check_input(const Network& net, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != net.input_dim()) {
    throw InvalidInputError(fmt::format("input has dimension {}, network expects {}",
                                        u.size(), net.input_dim()));
  }
  if (!u.allFinite()) throw InvalidInputError("input contains non-finite values");
}

}  // namespace

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidInputError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0) {
      throw InvalidInputError(fmt::format("layer {} has an empty weight matrix", i));
    }
    if (layer.bias.size() != layer.weight.rows()) {
      throw InvalidInputError(fmt::format("layer {}: bias length {} != {} output units", i,
                                          layer.bias.size(), layer.weight.rows()));
    }
    if (i > 0 && layer.weight.cols() != layers_[i - 1].weight.rows()) {
      throw InvalidInputError(fmt::format("layer {} expects {} inputs but layer {} emits {}", i,
                                          layer.weight.cols(), i - 1,
                                          layers_[i - 1].weight.rows()));
    }
    if (!all_finite(layer)) {
      throw InvalidInputError(fmt::format("layer {} has non-finite parameters", i));
    }
  }
}

std::vector<std::size_t> Network::hidden_widths() const {
  std::vector<std::size_t> widths;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) widths.push_back(layers_[i].weight.rows());
  return widths;
}

std::size_t Network::hidden_unit_count() const {
  const auto widths = hidden_widths();
  return std::accumulate(widths.begin(), widths.end(), std::size_t{0});
}

ActivationPattern::ActivationPattern(std::vector<std::vector<bool>> bits) : bits_(std::move(bits)) {}

ActivationPattern ActivationPattern::uniform(std::span<const std::size_t> widths, bool active) {
  std::vector<std::vector<bool>> bits;
  for (auto w : widths) bits.emplace_back(w, active);
  return ActivationPattern(std::move(bits));
}

ActivationPattern ActivationPattern::from_key(const std::string& key,
                                              std::span<const std::size_t> widths) {
  const std::size_t total = std::accumulate(widths.begin(), widths.end(), std::size_t{0});
  if (key.size() != total) {
    throw InvalidInputError(
        fmt::format("pattern key has {} bits, network has {} hidden units", key.size(), total));
  }
  std::vector<std::vector<bool>> bits;
  std::size_t pos = 0;
  for (auto w : widths) {
    std::vector<bool> layer(w);
    for (std::size_t j = 0; j < w; ++j, ++pos) {
      const char c = key[pos];
      if (c != '0' && c != '1') {
        throw InvalidInputError(fmt::format("pattern key has invalid character '{}'", c));
      }
      layer[j] = c == '1';
    }
    bits.push_back(std::move(layer));
  }
  return ActivationPattern(std::move(bits));
}

std::size_t ActivationPattern::total_bits() const {
  std::size_t n = 0;
  for (const auto& layer : bits_) n += layer.size();
  return n;
}

std::size_t ActivationPattern::active_count() const {
  std::size_t n = 0;
  for (const auto& layer : bits_) n += std::count(layer.begin(), layer.end(), true);
  return n;
}

std::string ActivationPattern::key() const {
  std::string s;
  s.reserve(total_bits());
  for (const auto& layer : bits_)
    for (bool b : layer) s.push_back(b ? '1' : '0');
  return s;
}

bool ActivationPattern::matches(const Network& net) const {
  const auto widths = net.hidden_widths();
  if (widths.size() != bits_.size()) return false;
  for (std::size_t i = 0; i < widths.size(); ++i)
    if (bits_[i].size() != widths[i]) return false;
  return true;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ForwardTrace forward_trace(const Network& net, const Eigen::VectorXd& u) {
  check_input(net, u);
  ForwardTrace trace;
  std::vector<std::vector<bool>> bits;
  Eigen::VectorXd x = u;
  const auto layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::VectorXd z = layers[i].weight * x + layers[i].bias;
    trace.preactivations.push_back(z);
    if (i + 1 == layers.size()) {
      trace.logit = z;
      break;
    }
    std::vector<bool> active(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) active[j] = z[j] > 0.0;
    bits.push_back(std::move(active));
    x = z.cwiseMax(0.0);
  }
  trace.probability = trace.logit.unaryExpr([](double v) { return sigmoid(v); });
  trace.pattern = ActivationPattern(std::move(bits));
  return trace;
}

Eigen::VectorXd logit(const Network& net, const Eigen::VectorXd& u) {
  check_input(net, u);
  Eigen::VectorXd x = u;
  const auto layers = net.layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i)
    x = (layers[i].weight * x + layers[i].bias).cwiseMax(0.0);
  return layers.back().weight * x + layers.back().bias;
}

ActivationPattern pattern_of(const Network& net, const Eigen::VectorXd& u) {
  return forward_trace(net, u).pattern;
}

int predict(const Network& net, const Eigen::VectorXd& u) {
  if (net.output_dim() != 1) {
    throw UnsupportedShapeError(
        fmt::format("predict needs a scalar output, network has {} outputs", net.output_dim()));
  }
  return logit(net, u)[0] > 0.0 ? 1 : 0;
}

nlohmann::json to_json(const Network& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : net.layers()) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) row.push_back(layer.weight(r, c));
      w.push_back(std::move(row));
    }
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) b.push_back(layer.bias[r]);
    layers.push_back({{"w", std::move(w)}, {"b", std::move(b)}});
  }
  return {{"layers", std::move(layers)}};
}

Network network_from_json(const nlohmann::json& doc) {
  auto number = [](const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + " is not a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(where + " is not finite");
    return d;
  };
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
    throw SchemaError("network JSON needs a \"layers\" array");
  }
  std::vector<Layer> layers;
  std::size_t li = 0;
  for (const auto& entry : doc["layers"]) {
    const std::string where = fmt::format("layers[{}]", li);
    if (!entry.is_object() || !entry.contains("w") || !entry.contains("b") ||
        !entry["w"].is_array() || !entry["b"].is_array()) {
      throw SchemaError(where + " needs \"w\" and \"b\" arrays");
    }
    const auto& w = entry["w"];
    const auto& b = entry["b"];
    const std::size_t rows = w.size();
    const std::size_t cols = rows > 0 && w[0].is_array() ? w[0].size() : 0;
    if (rows == 0 || cols == 0) throw SchemaError(where + ".w is empty");
    Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(b.size())};
    for (std::size_t r = 0; r < rows; ++r) {
      if (!w[r].is_array() || w[r].size() != cols) {
        throw SchemaError(fmt::format("{}.w row {} has the wrong length", where, r));
      }
      for (std::size_t c = 0; c < cols; ++c)
        layer.weight(r, c) = number(w[r][c], fmt::format("{}.w[{}][{}]", where, r, c));
    }
    for (std::size_t r = 0; r < b.size(); ++r)
      layer.bias[r] = number(b[r], fmt::format("{}.b[{}]", where, r));
    layers.push_back(std::move(layer));
    ++li;
  }
  try {
    return Network(std::move(layers));
  } catch (const InvalidInputError& e) {
    throw SchemaError(e.what());
  }
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << to_json(net).dump(2) << '\n';
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return network_from_json(doc);
}

}  // namespace relu_prism
