#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "relu_prism/error.h"
#include "relu_prism/explain.h"
#include "test_util.h"

namespace relu_prism {
namespace {

using Bits = std::vector<std::vector<bool>>;

Cluster cluster_with(Eigen::RowVectorXd omega, double bias, std::size_t size = 10,
                     double fraction = 0.5) {
  Cluster c;
  c.pattern = ActivationPattern(Bits{{true, false}});
  c.affine.omega = omega;
  c.affine.bias = Eigen::VectorXd::Constant(1, bias);
  c.stats.size = size;
  c.stats.fraction = fraction;
  return c;
}

TEST(ExplainTest, RawWeightsFollowFeatureOrder) {
  const Cluster c = cluster_with(Eigen::RowVector3d(0.5, -2.0, 1.0), 0.25);
  const auto r = feature_importance(c, {"a", "b", "c"}, Normalization::raw, 4);
  EXPECT_EQ(r.cluster_id, 4);
  ASSERT_EQ(r.feature_importances.size(), 3u);
  EXPECT_EQ(r.feature_importances[0].feature, "a");
  EXPECT_EQ(r.feature_importances[1].weight, -2.0);
  EXPECT_EQ(r.feature_importances[2].weight, 1.0);
  EXPECT_EQ(r.bias, 0.25);
}

TEST(ExplainTest, MaxAbsScalesWeightsButNotBias) {
  const Cluster c = cluster_with(Eigen::RowVector3d(0.5, -2.0, 1.0), 3.0);
  const auto r = feature_importance(c, {"a", "b", "c"}, Normalization::max_abs);
  EXPECT_EQ(r.feature_importances[0].weight, 0.25);
  EXPECT_EQ(r.feature_importances[1].weight, -1.0);
  EXPECT_EQ(r.feature_importances[2].weight, 0.5);
  EXPECT_EQ(r.bias, 3.0);
  EXPECT_EQ(r.normalization, Normalization::max_abs);
}

TEST(ExplainTest, AllInactiveClusterHasZeroImportance) {
  std::mt19937_64 rng(1);
  const Network net = testing::random_network({4, {3, 2}, 1, 1.0}, rng);
  Cluster c;
  c.pattern = ActivationPattern::uniform(net.hidden_widths(), false);
  c.affine = effective_affine(net, c.pattern);
  for (auto norm : {Normalization::raw, Normalization::max_abs}) {
    const auto r = feature_importance(c, {"a", "b", "c", "d"}, norm);
    for (const auto& fw : r.feature_importances) EXPECT_EQ(fw.weight, 0.0);
    EXPECT_EQ(r.bias, net.layers().back().bias[0]);
  }
}

// Permuting input columns permutes the importances the same way.
TEST(ExplainTest, ImportanceFollowsColumnPermutation) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = testing::random_network({5, {4, 3}, 1, 1.0}, rng);
    std::vector<int> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Layer> layers(net.layers().begin(), net.layers().end());
    Eigen::MatrixXd permuted(layers[0].weight.rows(), 5);
    for (int k = 0; k < 5; ++k) permuted.col(k) = layers[0].weight.col(perm[k]);
    layers[0].weight = permuted;
    const Network moved(layers);
    const ActivationPattern p = pattern_of(net, testing::random_input(5, 2.0, rng));
    Cluster a, b;
    a.pattern = b.pattern = p;
    a.affine = effective_affine(net, p);
    b.affine = effective_affine(moved, p);
    const std::vector<std::string> names{"f0", "f1", "f2", "f3", "f4"};
    const auto ra = feature_importance(a, names, Normalization::max_abs);
    const auto rb = feature_importance(b, names, Normalization::max_abs);
    for (int k = 0; k < 5; ++k)
      EXPECT_NEAR(rb.feature_importances[k].weight, ra.feature_importances[perm[k]].weight, 1e-12);
    EXPECT_NEAR(ra.bias, rb.bias, 1e-12);
  }
}

TEST(ExplainTest, RejectsVectorOutputAndNameMismatch) {
  Cluster c;
  c.affine.omega = Eigen::MatrixXd::Ones(2, 3);
  c.affine.bias = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(feature_importance(c, {"a", "b", "c"}), UnsupportedShapeError);
  const Cluster ok = cluster_with(Eigen::RowVector3d(1, 2, 3), 0.0);
  EXPECT_THROW(feature_importance(ok, {"a", "b"}), InvalidInputError);
}

TEST(ExplainTest, CsvHasOneRowPerClusterFeaturePair) {
  std::vector<Cluster> clusters;
  for (int i = 0; i < 3; ++i)
    clusters.push_back(cluster_with(Eigen::RowVectorXd::Constant(7, i + 1.0), -i, 10 - i, 0.1 * i));
  const std::vector<std::string> names{"Age", "Gender", "Pclass", "Fare", "Embarked", "Title", "IsAlone"};
  const auto reports = feature_importances(clusters, names);
  const std::string csv = render_report(clusters, reports, ReportFormat::csv);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "cluster_id,feature,weight,bias,size,fraction");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 21);
  EXPECT_NE(csv.find("\n2,Title,3,-2,8,0.2\n"), std::string::npos) << csv;
}

TEST(ExplainTest, EmptyReportStillHasHeader) {
  const std::string csv = render_report({}, {}, ReportFormat::csv);
  EXPECT_EQ(csv, "cluster_id,feature,weight,bias,size,fraction\n");
  EXPECT_EQ(nlohmann::json::parse(render_report({}, {}, ReportFormat::json)), nlohmann::json::array());
}

TEST(ExplainTest, JsonKeepsFeatureOrderAndRendersDeterministically) {
  std::vector<Cluster> clusters{cluster_with(Eigen::RowVector3d(3, 1, 2), 0.5)};
  const auto reports = feature_importances(clusters, {"z", "a", "m"});
  const std::string once = render_report(clusters, reports, ReportFormat::json);
  EXPECT_EQ(once, render_report(clusters, reports, ReportFormat::json));
  const auto doc = nlohmann::json::parse(once);
  EXPECT_EQ(doc[0]["weights"][0]["feature"], "z");
  EXPECT_EQ(doc[0]["weights"][1]["feature"], "a");
  EXPECT_EQ(doc[0]["weights"][2]["weight"], 2.0);
}

TEST(ExplainTest, TextTableMarksAllInactiveCluster) {
  Cluster dead = cluster_with(Eigen::RowVector2d(0, 0), -1.0);
  dead.pattern = ActivationPattern(Bits{{false, false}});
  std::vector<Cluster> clusters{cluster_with(Eigen::RowVector2d(1, 2), 0.0), dead};
  const auto reports = feature_importances(clusters, {"a", "b"});
  const std::string table = render_report(clusters, reports, ReportFormat::text_table);
  EXPECT_NE(table.find("00*"), std::string::npos);
  EXPECT_EQ(table.find("10*"), std::string::npos);
}

TEST(ExplainTest, ParsersRejectUnknownNames) {
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
  EXPECT_EQ(parse_normalization("max_abs"), Normalization::max_abs);
  EXPECT_THROW(parse_report_format("xml"), InvalidInputError);
  EXPECT_THROW(parse_normalization("l2"), InvalidInputError);
  const std::vector<Cluster> one{cluster_with(Eigen::RowVector2d(1, 2), 0.0)};
  EXPECT_THROW(render_report(one, {}, ReportFormat::csv), InvalidInputError);
}

}  // namespace
}  // namespace relu_prism
