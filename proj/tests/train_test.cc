#include <gtest/gtest.h>

#include <random>

#include "relu_prism/error.h"
#include "relu_prism/train.h"
#include "test_util.h"

namespace relu_prism {
namespace {

struct Batch {
  Eigen::MatrixXd x;
  std::vector<int> t;
};

Batch random_batch(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  Batch b{Eigen::MatrixXd(n, d), {}};
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    b.x.row(i) = testing::random_input(d, 2.0, rng).transpose();
    b.t.push_back(coin(rng));
  }
  return b;
}

double min_hidden_margin(const Network& net, const Eigen::MatrixXd& x) {
  double m = INFINITY;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    m = std::min(m, testing::oracle_forward(net, testing::to_vec(x.row(i).transpose())).min_abs_hidden);
  return m;
}

// Central differences of the oracle objective against the analytic gradient.
void expect_gradient_matches(const Network& net, const Batch& b, const TrainConfig& cfg) {
  const bool l1 = cfg.activity_norm == ActivityNorm::l1;
  const bool mean = cfg.activity_reduction == ActivityReduction::mean;
  const double coeff = cfg.activity_reg_coeff;
  const auto lg = loss_and_gradient(net, b.x, b.t, cfg);
  EXPECT_NEAR(lg.loss, testing::oracle_objective(net, b.x, b.t, coeff, l1, mean), 1e-12);

  const double h = 1e-5;
  std::vector<Layer> layers(net.layers().begin(), net.layers().end());
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = testing::oracle_objective(Network(layers), b.x, b.t, coeff, l1, mean);
    param = saved - h;
    const double down = testing::oracle_objective(Network(layers), b.x, b.t, coeff, l1, mean);
    param = saved;
    const double fd = (up - down) / (2 * h);
    EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::max(std::abs(fd), 0.1)) << fd << " vs " << analytic;
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (Eigen::Index r = 0; r < layers[i].weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layers[i].weight.cols(); ++c)
        probe(layers[i].weight(r, c), lg.gradient[i].weight(r, c));
      probe(layers[i].bias[r], lg.gradient[i].bias[r]);
    }
  }
}

TEST(BceTest, StableAndCorrect) {
  EXPECT_NEAR(bce_with_logits(0.0, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_with_logits(2.0, 1), std::log1p(std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(bce_with_logits(2.0, 0), 2.0 + std::log1p(std::exp(-2.0)), 1e-15);
  EXPECT_EQ(bce_with_logits(1000.0, 1), 0.0);
  EXPECT_EQ(bce_with_logits(-1000.0, 1), 1000.0);
  EXPECT_TRUE(std::isfinite(bce_with_logits(-1e300, 1)));
}

TEST(GradientTest, MatchesFiniteDifferencesAcrossPenaltyModes) {
  std::mt19937_64 rng(1);
  const std::vector<std::vector<std::size_t>> archs{{1}, {3}, {4, 2}, {3, 3}};
  const std::vector<std::size_t> inputs{2, 2, 3, 2};  // {1} on d=2 has 5 params; {4,2} on d=3 has 29
  int checked = 0;
  for (std::size_t a = 0; a < archs.size(); ++a) {
    for (auto norm : {ActivityNorm::l1, ActivityNorm::l2}) {
      for (auto red : {ActivityReduction::mean, ActivityReduction::sum}) {
        for (double coeff : {0.0, 0.5}) {
          TrainConfig cfg;
          cfg.hidden_widths = archs[a];
          cfg.activity_norm = norm;
          cfg.activity_reduction = red;
          cfg.activity_reg_coeff = coeff;
          for (int attempt = 0; attempt < 20; ++attempt) {
            const Network net = testing::random_network({inputs[a], archs[a], 1, 1.0}, rng);
            const Batch b = random_batch(8, inputs[a], rng);
            if (min_hidden_margin(net, b.x) < 1e-3) continue;  // too close to a kink
            expect_gradient_matches(net, b, cfg);
            ++checked;
            break;
          }
        }
      }
    }
  }
  EXPECT_EQ(checked, 32);
}

TEST(GradientTest, RegularizedLayerSubset) {
  std::mt19937_64 rng(2);
  TrainConfig cfg;
  cfg.hidden_widths = {3, 2};
  cfg.regularized_layers = {1};
  cfg.activity_reg_coeff = 0.7;
  const Network net = testing::random_network({2, {3, 2}, 1, 1.0}, rng);
  const Batch b = random_batch(6, 2, rng);
  const auto lg = loss_and_gradient(net, b.x, b.t, cfg);
  // Only layer 1 is penalized: full penalty minus layer 0's share.
  TrainConfig none = cfg;
  none.activity_reg_coeff = 0.0;
  const double base = loss_and_gradient(net, b.x, b.t, none).loss;
  double pen1 = 0.0;
  for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
    const ForwardTrace tr = forward_trace(net, b.x.row(i).transpose());
    pen1 += tr.preactivations[1].cwiseMax(0.0).sum() / 2.0;
  }
  EXPECT_NEAR(lg.loss, base + 0.7 * pen1 / b.x.rows(), 1e-12);
}

TEST(InitTest, ShapesBiasesAndDeterminism) {
  TrainConfig cfg;
  const Network a = init_network(10, cfg), b = init_network(10, cfg);
  ASSERT_EQ(a.depth(), 3u);
  EXPECT_EQ(a.layer(0).weight.rows(), 4);
  EXPECT_EQ(a.layer(0).weight.cols(), 10);
  EXPECT_EQ(a.layer(1).weight.rows(), 2);
  EXPECT_EQ(a.layer(2).weight.rows(), 1);
  EXPECT_EQ(a.layer(2).weight.cols(), 2);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.layer(i).weight, b.layer(i).weight);
    EXPECT_TRUE(a.layer(i).bias.isZero(0.0));
    const double limit = std::sqrt(6.0 / (a.layer(i).weight.rows() + a.layer(i).weight.cols()));
    EXPECT_LE(a.layer(i).weight.cwiseAbs().maxCoeff(), limit);
  }
  EXPECT_EQ(logit(a, Eigen::VectorXd::Zero(10))[0], 0.0);
  cfg.seed = 2;
  EXPECT_NE(init_network(10, cfg).layer(0).weight, a.layer(0).weight);
}

Dataset separable(std::size_t n, std::mt19937_64& rng) {
  Dataset d;
  d.features.resize(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d u = testing::random_input(2, 1.0, rng);
    if (std::abs(u[0] + u[1]) < 0.2) u[0] += u[0] + u[1] > 0 ? 0.3 : -0.3;  // margin
    d.features.row(i) = u.transpose();
    d.targets.push_back(u[0] + u[1] > 0 ? 1 : 0);
  }
  d.feature_names = {"a", "b"};
  return d;
}

TEST(TrainTest, LearnsSeparableToy) {
  std::mt19937_64 rng(3);
  const Dataset d = separable(400, rng);
  TrainConfig cfg;
  cfg.activity_reg_coeff = 0.0;
  cfg.epochs = 60;
  cfg.batch_size = 20;
  cfg.learning_rate = 0.02;
  const TrainResult r = train(d, cfg);
  EXPECT_EQ(accuracy(r.network, d), 1.0);
  EXPECT_LT(r.history.back().loss, r.initial_loss);
  EXPECT_EQ(r.history.size(), 60u);
}

TEST(TrainTest, SeededRunsAreBitIdentical) {
  const Dataset d = gen_boolean(2000, 5);
  TrainConfig cfg;
  cfg.epochs = 3;
  const TrainResult a = train(d, cfg), b = train(d, cfg);
  for (std::size_t i = 0; i < a.network.depth(); ++i) {
    EXPECT_EQ(a.network.layer(i).weight, b.network.layer(i).weight);
    EXPECT_EQ(a.network.layer(i).bias, b.network.layer(i).bias);
  }
  ASSERT_EQ(a.history.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(a.history[e].loss, b.history[e].loss);
  EXPECT_LT(a.history.back().loss, a.initial_loss);
  EXPECT_DOUBLE_EQ(a.history.back().loss, objective(a.network, d, cfg));
}

TEST(TrainTest, HugeLearningRateDiverges) {
  const Dataset d = gen_boolean(500, 1);
  TrainConfig cfg;
  cfg.learning_rate = 1e306;
  cfg.epochs = 5;
  EXPECT_THROW(train(d, cfg), TrainingDivergedError);
}

TEST(TrainTest, RejectsBadConfig) {
  const Dataset d = gen_boolean(100, 1);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(d, cfg), InvalidInputError);
  cfg = {};
  cfg.regularized_layers = {2};
  EXPECT_THROW(train(d, cfg), InvalidInputError);
  cfg = {};
  cfg.activity_reg_coeff = -1.0;
  EXPECT_THROW(train(d, cfg), InvalidInputError);
  EXPECT_THROW(parse_activity_norm("l3"), InvalidInputError);
  EXPECT_EQ(parse_activity_reduction("sum"), ActivityReduction::sum);
}

TEST(AccuracyTest, ConstantNetworks) {
  const Dataset d = gen_boolean(100, 2);
  Layer always{Eigen::MatrixXd::Zero(1, 10), Eigen::VectorXd::Constant(1, 5.0)};
  const Network yes({always});
  Dataset ones = d, zeros = d;
  std::fill(ones.targets.begin(), ones.targets.end(), 1);
  std::fill(zeros.targets.begin(), zeros.targets.end(), 0);
  EXPECT_EQ(accuracy(yes, ones), 1.0);
  EXPECT_EQ(accuracy(yes, zeros), 0.0);
  EXPECT_DOUBLE_EQ(accuracy(yes, d), d.target_rate());
  Dataset empty;
  empty.features.resize(0, 10);
  EXPECT_THROW(accuracy(yes, empty), InvalidInputError);
}

}  // namespace
}  // namespace relu_prism
