#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relu_prism/partition.h"

namespace relu_prism {

enum class Normalization { raw, max_abs };

struct FeatureWeight {
  std::string feature;
  double weight;
};

// Per-cluster feature importance: the effective vector with names attached.
struct ImportanceReport {
  int cluster_id = 0;
  std::vector<FeatureWeight> feature_importances;  // dataset feature order
  double bias = 0.0;
  Normalization normalization = Normalization::raw;
};

// Reads the cluster's effective vector as feature importance. Under max_abs
// the weights are divided by the largest |weight| (left as-is when all are 0).
// The bias is always reported raw.
ImportanceReport feature_importance(const Cluster& cluster,
                                    const std::vector<std::string>& feature_names,
                                    Normalization normalization = Normalization::raw,
                                    int cluster_id = 0);

std::vector<ImportanceReport> feature_importances(std::span<const Cluster> clusters,
                                                  const std::vector<std::string>& feature_names,
                                                  Normalization normalization = Normalization::raw);

enum class ReportFormat { json, csv, text_table };

ReportFormat parse_report_format(std::string_view name);
Normalization parse_normalization(std::string_view name);
std::string_view to_string(Normalization normalization);

// Renders aligned cluster/report lists. csv columns:
// cluster_id,feature,weight,bias,size,fraction
std::string render_report(std::span<const Cluster> clusters,
                          std::span<const ImportanceReport> reports, ReportFormat format);

}  // namespace relu_prism
