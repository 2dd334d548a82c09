#include "relu_prism/partition.h"

#include <algorithm>
#include <map>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "relu_prism/error.h"

namespace relu_prism {

namespace {

struct RowInfo {
  std::string key;
  bool predicted_positive;
};

// Pattern extraction is a pure per-row map; chunks run on separate threads and
// the grouping below is a sequential pass in row order.
std::vector<RowInfo> trace_rows(const Network& net, const Dataset& data) {
  const std::size_t n = data.rows();
  std::vector<RowInfo> rows(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const ForwardTrace trace = forward_trace(net, data.row(i));
      rows[i] = {trace.pattern.key(), trace.logit[0] > 0.0};
    }
  };
  const std::size_t workers =
      n < 4096 ? 1 : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  if (workers == 1) {
    work(0, n);
    return rows;
  }
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) threads.emplace_back(work, begin, end);
    }
  }
  return rows;
}

}  // namespace

std::vector<Cluster> partition(const Network& net, const Dataset& data) {
  if (data.rows() == 0) throw InvalidInputError("cannot partition an empty dataset");
  if (data.dims() != net.input_dim()) {
    throw InvalidInputError(fmt::format("dataset has {} features, network expects {}",
                                        data.dims(), net.input_dim()));
  }
  if (data.targets.size() != data.rows()) throw InvalidInputError("dataset targets misaligned");

  const auto rows = trace_rows(net, data);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) groups[rows[i].key].push_back(i);

  const auto widths = net.hidden_widths();
  const double n = static_cast<double>(data.rows());
  std::vector<Cluster> clusters;
  clusters.reserve(groups.size());
  for (auto& [key, members] : groups) {
    Cluster c;
    c.pattern = ActivationPattern::from_key(key, widths);
    c.affine = effective_affine(net, c.pattern);
    std::size_t predicted = 0, positive = 0;
    for (auto i : members) {
      predicted += rows[i].predicted_positive ? 1 : 0;
      positive += data.targets[i] == 1 ? 1 : 0;
    }
    c.stats.size = members.size();
    c.stats.fraction = members.size() / n;
    c.stats.predicted_positive_rate = static_cast<double>(predicted) / members.size();
    c.stats.target_positive_rate = static_cast<double>(positive) / members.size();
    c.member_indices = std::move(members);
    clusters.push_back(std::move(c));
  }
  // groups is keyed by bitstring, so a stable sort on size keeps the tie order.
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.stats.size > b.stats.size;
  });
  return clusters;
}

const Cluster* cluster_of(std::span<const Cluster> clusters, const Network& net,
                          const Eigen::VectorXd& u) {
  const ActivationPattern pattern = pattern_of(net, u);
  for (const Cluster& c : clusters)
    if (c.pattern == pattern) return &c;
  return nullptr;
}

nlohmann::json clusters_to_json(std::span<const Cluster> clusters) {
  nlohmann::json out = nlohmann::json::array();
  for (const Cluster& c : clusters) {
    nlohmann::json entry = to_json(c.affine, c.pattern);
    entry["size"] = c.stats.size;
    entry["fraction"] = c.stats.fraction;
    entry["predicted_positive_rate"] = c.stats.predicted_positive_rate;
    entry["target_positive_rate"] = c.stats.target_positive_rate;
    entry["all_inactive"] = c.all_inactive();
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace relu_prism
