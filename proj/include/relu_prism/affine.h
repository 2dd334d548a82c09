#pragma once

#include <cstddef>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "relu_prism/network.h"

namespace relu_prism {

inline constexpr double kDefaultAffineTolerance = 1e-6;
inline constexpr double kDefaultJacobianTolerance = 1e-4;
inline constexpr double kDefaultJacobianStep = 1e-5;

// The map u -> omega * u + bias that the network computes on one activation
// region. For a scalar output, omega's single row is the effective vector.
struct AffineMap {
  Eigen::MatrixXd omega;  // q x d
  Eigen::VectorXd bias;   // q

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return omega * u + bias; }
};

// Network layers with every inactive unit's row (weight and bias) zeroed.
// Zeroing a row is the same as deleting the unit and its arcs. The output
// layer is returned unmasked.
std::vector<Layer> masked_layers(const Network& net, const ActivationPattern& pattern);

// Exact affine map of the network restricted to `pattern`, built by the
// forward sweep omega <- W'_i * omega, bias <- W'_i * bias + b'_i over the
// masked layers.
AffineMap effective_affine(const Network& net, const ActivationPattern& pattern);

// Thread-safe memo of effective_affine keyed by pattern bitstring. Concurrent
// misses on the same key may compute twice; the stored value is never torn.
class AffineCache {
 public:
  explicit AffineCache(Network net) : net_(std::move(net)) {}

  AffineMap get(const ActivationPattern& pattern);
  std::size_t size() const;
  const Network& network() const noexcept { return net_; }

 private:
  Network net_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, AffineMap> maps_;
};

struct AffineVerifyReport {
  double max_abs_err = 0.0;
  std::size_t worst_index = 0;
  bool pass = false;
  std::size_t distinct_patterns = 0;
};

// Checks |omega * u + bias - logit(u)|_inf <= tol for every input, using the
// pattern of each input. Rejects tol <= 0 and empty input lists.
AffineVerifyReport verify_affine(const Network& net, std::span<const Eigen::VectorXd> inputs,
                                 double tol = kDefaultAffineTolerance);
// Same, one input per row of `inputs`.
AffineVerifyReport verify_affine(const Network& net, const Eigen::MatrixXd& inputs,
                                 double tol = kDefaultAffineTolerance);

enum class JacobianOutcome { checked, boundary };

struct JacobianReport {
  JacobianOutcome outcome = JacobianOutcome::boundary;
  double max_row_err = 0.0;
  // Smallest |preactivation| over the hidden units at u.
  double min_abs_preactivation = 0.0;
};

// Central finite differences of the logit compared entrywise with omega.
// Skipped with a boundary outcome when some hidden preactivation lies within
// 10*h of zero or when a stencil point leaves u's activation region.
JacobianReport jacobian_check(const Network& net, const Eigen::VectorXd& u,
                              double h = kDefaultJacobianStep);

// {"pattern": "0110...", "omega": [[...]], "bias": [...]}
nlohmann::json to_json(const AffineMap& map, const ActivationPattern& pattern);

}  // namespace relu_prism
