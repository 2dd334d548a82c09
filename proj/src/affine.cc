#include "relu_prism/affine.h"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "relu_prism/error.h"

namespace relu_prism {

namespace {

void check_pattern(const Network& net, const ActivationPattern& pattern) {
  if (!pattern.matches(net)) {
    throw InvalidInputError(fmt::format(
        "activation pattern with {} layers / {} bits does not fit a network with {} hidden units",
        pattern.layer_count(), pattern.total_bits(), net.hidden_unit_count()));
  }
}

}  // namespace

std::vector<Layer> masked_layers(const Network& net, const ActivationPattern& pattern) {
  check_pattern(net, pattern);
  std::vector<Layer> out(net.layers().begin(), net.layers().end());
  for (std::size_t i = 0; i < pattern.layer_count(); ++i) {
    const auto& bits = pattern.layers()[i];
    for (std::size_t j = 0; j < bits.size(); ++j) {
      if (bits[j]) continue;
      out[i].weight.row(j).setZero();
      out[i].bias[j] = 0.0;
    }
  }
  return out;
}

AffineMap effective_affine(const Network& net, const ActivationPattern& pattern) {
  const auto layers = masked_layers(net, pattern);
  // Basis: the identity map on the input.
  AffineMap map{Eigen::MatrixXd::Identity(net.input_dim(), net.input_dim()),
                Eigen::VectorXd::Zero(net.input_dim())};
  for (const Layer& layer : layers) {
    map.omega = layer.weight * map.omega;
    map.bias = layer.weight * map.bias + layer.bias;
  }
  return map;
}

AffineMap AffineCache::get(const ActivationPattern& pattern) {
  const std::string key = pattern.key();
  {
    std::shared_lock lock(mutex_);
    if (auto it = maps_.find(key); it != maps_.end()) return it->second;
  }
  AffineMap map = effective_affine(net_, pattern);
  std::unique_lock lock(mutex_);
  return maps_.try_emplace(key, std::move(map)).first->second;
}

std::size_t AffineCache::size() const {
  std::shared_lock lock(mutex_);
  return maps_.size();
}

AffineVerifyReport verify_affine(const Network& net, std::span<const Eigen::VectorXd> inputs,
                                 double tol) {
  if (!(tol > 0.0)) throw InvalidInputError(fmt::format("tolerance must be > 0, got {}", tol));
  if (inputs.empty()) throw InvalidInputError("verify_affine needs at least one input");
  AffineCache cache(net);
  AffineVerifyReport report;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ForwardTrace trace = forward_trace(net, inputs[i]);
    const AffineMap map = cache.get(trace.pattern);
    const double err = (map.apply(inputs[i]) - trace.logit).cwiseAbs().maxCoeff();
    // Strict comparison keeps the first worst index, independent of ties later on.
    if (err > report.max_abs_err || std::isnan(err)) {
      report.max_abs_err = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
      report.worst_index = i;
    }
  }
  report.distinct_patterns = cache.size();
  report.pass = report.max_abs_err <= tol;
  return report;
}

AffineVerifyReport verify_affine(const Network& net, const Eigen::MatrixXd& inputs, double tol) {
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(inputs.rows());
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) rows.emplace_back(inputs.row(r).transpose());
  return verify_affine(net, rows, tol);
}

JacobianReport jacobian_check(const Network& net, const Eigen::VectorXd& u, double h) {
  if (!(h > 0.0)) throw InvalidInputError(fmt::format("finite-difference step must be > 0, got {}", h));
  const ForwardTrace trace = forward_trace(net, u);
  JacobianReport report;
  report.min_abs_preactivation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < trace.preactivations.size(); ++i) {
    report.min_abs_preactivation =
        std::min(report.min_abs_preactivation, trace.preactivations[i].cwiseAbs().minCoeff());
  }
  if (report.min_abs_preactivation < 10.0 * h) return report;

  const AffineMap map = effective_affine(net, trace.pattern);
  for (std::size_t k = 0; k < net.input_dim(); ++k) {
    Eigen::VectorXd plus = u;
    Eigen::VectorXd minus = u;
    plus[k] += h;
    minus[k] -= h;
    const ForwardTrace tp = forward_trace(net, plus);
    const ForwardTrace tm = forward_trace(net, minus);
    if (tp.pattern != trace.pattern || tm.pattern != trace.pattern) {
      report.max_row_err = 0.0;
      return report;
    }
    const Eigen::VectorXd column = (tp.logit - tm.logit) / (2.0 * h);
    report.max_row_err =
        std::max(report.max_row_err, (column - map.omega.col(k)).cwiseAbs().maxCoeff());
  }
  report.outcome = JacobianOutcome::checked;
  return report;
}

nlohmann::json to_json(const AffineMap& map, const ActivationPattern& pattern) {
  nlohmann::json omega = nlohmann::json::array();
  for (Eigen::Index r = 0; r < map.omega.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < map.omega.cols(); ++c) row.push_back(map.omega(r, c));
    omega.push_back(std::move(row));
  }
  nlohmann::json bias = nlohmann::json::array();
  for (Eigen::Index r = 0; r < map.bias.size(); ++r) bias.push_back(map.bias[r]);
  return {{"pattern", pattern.key()}, {"omega", std::move(omega)}, {"bias", std::move(bias)}};
}

}  // namespace relu_prism
