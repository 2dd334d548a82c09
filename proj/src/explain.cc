#include "relu_prism/explain.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "csv.h"
#include "json.hpp"
#include "relu_prism/error.h"

namespace relu_prism {

ImportanceReport feature_importance(const Cluster& cluster,
                                    const std::vector<std::string>& feature_names,
                                    Normalization normalization, int cluster_id) {
  const Eigen::MatrixXd& omega = cluster.affine.omega;
  if (omega.rows() != 1) {
    throw UnsupportedShapeError(
        fmt::format("feature importance needs a scalar output, cluster map has {} rows", omega.rows()));
  }
  if (feature_names.size() != static_cast<std::size_t>(omega.cols())) {
    throw InvalidInputError(fmt::format("{} feature names for an effective vector of length {}",
                                        feature_names.size(), omega.cols()));
  }
  ImportanceReport report;
  report.cluster_id = cluster_id;
  report.bias = cluster.affine.bias[0];
  report.normalization = normalization;
  const double scale = omega.row(0).cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < feature_names.size(); ++k) {
    double w = omega(0, k);
    if (normalization == Normalization::max_abs && scale > 0.0) w /= scale;
    report.feature_importances.push_back({feature_names[k], w});
  }
  return report;
}

std::vector<ImportanceReport> feature_importances(std::span<const Cluster> clusters,
                                                  const std::vector<std::string>& feature_names,
                                                  Normalization normalization) {
  std::vector<ImportanceReport> reports;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    reports.push_back(feature_importance(clusters[i], feature_names, normalization, static_cast<int>(i)));
  return reports;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "text" || name == "text-table") return ReportFormat::text_table;
  throw InvalidInputError(fmt::format("unknown report format '{}'", name));
}

Normalization parse_normalization(std::string_view name) {
  if (name == "raw") return Normalization::raw;
  if (name == "max_abs" || name == "max-abs") return Normalization::max_abs;
  throw InvalidInputError(fmt::format("unknown normalization '{}'", name));
}

std::string_view to_string(Normalization normalization) {
  return normalization == Normalization::raw ? "raw" : "max_abs";
}

namespace {

std::string render_json(std::span<const Cluster> clusters, std::span<const ImportanceReport> reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& c = clusters[i];
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& fw : r.feature_importances)
      weights.push_back({{"feature", fw.feature}, {"weight", fw.weight}});
    doc.push_back({{"cluster_id", r.cluster_id},
                   {"pattern", c.pattern.key()},
                   {"all_inactive", c.all_inactive()},
                   {"size", c.stats.size},
                   {"fraction", c.stats.fraction},
                   {"normalization", std::string(to_string(r.normalization))},
                   {"bias", r.bias},
                   {"weights", std::move(weights)}});
  }
  return doc.dump(2) + "\n";
}

std::string render_csv(std::span<const Cluster> clusters, std::span<const ImportanceReport> reports) {
  std::string out = "cluster_id,feature,weight,bias,size,fraction\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    for (const auto& fw : r.feature_importances) {
      out += fmt::format("{},{},{},{},{},{}\n", r.cluster_id, internal::csv_escape(fw.feature),
                         fw.weight, r.bias, clusters[i].stats.size, clusters[i].stats.fraction);
    }
  }
  return out;
}

std::string render_text(std::span<const Cluster> clusters, std::span<const ImportanceReport> reports) {
  std::vector<std::string> names;
  if (!reports.empty())
    for (const auto& fw : reports.front().feature_importances) names.push_back(fw.feature);
  std::size_t pattern_width = 7;
  for (const auto& c : clusters) pattern_width = std::max(pattern_width, c.pattern.key().size());

  std::string out = fmt::format("{:>7}  {:<{}}  {:>8}  {:>8}  {:>6}  {:>10}", "cluster", "pattern",
                                pattern_width, "size", "fraction", "pred+", "bias");
  for (const auto& name : names) out += fmt::format("  {:>10}", name);
  out += '\n';
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& c = clusters[i];
    out += fmt::format("{:>7}  {:<{}}  {:>8}  {:>8.4f}  {:>6.3f}  {:>10.4f}", r.cluster_id,
                       c.pattern.key() + (c.all_inactive() ? "*" : ""), pattern_width, c.stats.size,
                       c.stats.fraction, c.stats.predicted_positive_rate, r.bias);
    for (const auto& fw : r.feature_importances) out += fmt::format("  {:>10.4f}", fw.weight);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string render_report(std::span<const Cluster> clusters,
                          std::span<const ImportanceReport> reports, ReportFormat format) {
  if (clusters.size() != reports.size()) {
    throw InvalidInputError(
        fmt::format("{} clusters but {} importance reports", clusters.size(), reports.size()));
  }
  switch (format) {
    case ReportFormat::json:
      return render_json(clusters, reports);
    case ReportFormat::csv:
      return render_csv(clusters, reports);
    case ReportFormat::text_table:
      return render_text(clusters, reports);
  }
  throw InvalidInputError("unknown report format");
}

}  // namespace relu_prism
