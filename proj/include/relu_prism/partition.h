#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "relu_prism/affine.h"
#include "relu_prism/dataset.h"
#include "relu_prism/network.h"

namespace relu_prism {

struct ClusterStats {
  std::size_t size = 0;
  double fraction = 0.0;                 // size / dataset rows
  double predicted_positive_rate = 0.0;  // members with logit[0] > 0
  double target_positive_rate = 0.0;
};

// One equivalence class of inputs sharing an activation pattern.
struct Cluster {
  ActivationPattern pattern;
  std::vector<std::size_t> member_indices;  // strictly increasing row indices
  AffineMap affine;
  ClusterStats stats;

  bool all_inactive() const { return pattern.all_inactive(); }
};

// Groups the dataset's rows by activation pattern. Clusters are ordered by size
// (largest first), ties by pattern bitstring.
std::vector<Cluster> partition(const Network& net, const Dataset& data);

// The cluster whose pattern u realizes, or nullptr if no analyzed row had it.
const Cluster* cluster_of(std::span<const Cluster> clusters, const Network& net,
                          const Eigen::VectorXd& u);

// [{"pattern", "size", "fraction", "predicted_positive_rate",
//   "target_positive_rate", "omega", "bias", "all_inactive"}, ...]
nlohmann::json clusters_to_json(std::span<const Cluster> clusters);

}  // namespace relu_prism
