#pragma once

// Test-only helpers: random network generators and oracles written against
// plain std::vector arithmetic so they share no code path with the library.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "relu_prism/network.h"

namespace relu_prism::testing {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

struct RandomNetSpec {
  std::size_t input_dim;
  std::vector<std::size_t> hidden;  // ReLU widths
  std::size_t output_dim = 1;
  double weight_range = 1.0;
};

inline Network random_network(const RandomNetSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(-spec.weight_range, spec.weight_range);
  std::vector<std::size_t> dims{spec.input_dim};
  dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
  dims.push_back(spec.output_dim);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Layer l{Eigen::MatrixXd(dims[i + 1], dims[i]), Eigen::VectorXd(dims[i + 1])};
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = w(rng);
      l.bias[r] = w(rng);
    }
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

// Random architecture: 1..max_depth affine layers, widths 1..max_width.
inline RandomNetSpec random_spec(std::mt19937_64& rng, std::size_t max_depth, std::size_t max_width,
                                 std::size_t max_input, double weight_range = 1.0) {
  std::uniform_int_distribution<std::size_t> depth(1, max_depth), width(1, max_width),
      input(1, max_input);
  RandomNetSpec spec{input(rng), {}, 1, weight_range};
  const std::size_t layers = depth(rng);
  for (std::size_t i = 0; i + 1 < layers; ++i) spec.hidden.push_back(width(rng));
  return spec;
}

inline Eigen::VectorXd random_input(std::size_t d, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-range, range);
  Eigen::VectorXd x(d);
  for (std::size_t k = 0; k < d; ++k) x[k] = u(rng);
  return x;
}

inline Mat to_mat(const Eigen::MatrixXd& m) {
  Mat out(m.rows(), Vec(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline Vec to_vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

struct OracleTrace {
  Vec logit;
  std::string pattern;      // "0110..." over hidden units
  double min_abs_hidden;    // smallest |preactivation| over hidden units
};

// Layer-by-layer evaluation with explicit loops.
inline OracleTrace oracle_forward(const Network& net, const Vec& u) {
  OracleTrace t{{}, "", INFINITY};
  Vec x = u;
  const auto layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Mat w = to_mat(layers[i].weight);
    Vec z(w.size());
    for (std::size_t r = 0; r < w.size(); ++r) {
      double s = layers[i].bias[r];
      for (std::size_t c = 0; c < x.size(); ++c) s += w[r][c] * x[c];
      z[r] = s;
    }
    if (i + 1 == layers.size()) {
      t.logit = z;
      break;
    }
    for (double& v : z) {
      t.pattern.push_back(v > 0.0 ? '1' : '0');
      t.min_abs_hidden = std::min(t.min_abs_hidden, std::abs(v));
      v = v > 0.0 ? v : 0.0;
    }
    x = z;
  }
  return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat out(a.size(), Vec(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Mat identity(std::size_t n) {
  Mat m(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

struct OracleAffine {
  Mat omega;
  Vec bias;
};

// Literal product/sum formula: omega = W'_p ... W'_1 and
// bias = sum_i (W'_p ... W'_{i+1}) b'_i, with inactive rows zeroed.
inline OracleAffine product_formula_affine(const Network& net, const std::string& pattern) {
  const auto layers = net.layers();
  const std::size_t p = layers.size();
  std::vector<Mat> w(p);
  std::vector<Vec> b(p);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < p; ++i) {
    w[i] = to_mat(layers[i].weight);
    b[i] = to_vec(layers[i].bias);
    if (i + 1 == p) continue;
    for (std::size_t r = 0; r < w[i].size(); ++r, ++bit) {
      if (pattern.at(bit) == '1') continue;
      for (double& v : w[i][r]) v = 0.0;
      b[i][r] = 0.0;
    }
  }
  OracleAffine out;
  out.omega = identity(net.input_dim());
  for (std::size_t i = 0; i < p; ++i) out.omega = matmul(w[i], out.omega);
  out.bias.assign(net.output_dim(), 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    Mat prod = identity(w[i].size());  // W_{p+1} := identity
    for (std::size_t t = i + 1; t < p; ++t) prod = matmul(w[t], prod);
    for (std::size_t r = 0; r < prod.size(); ++r)
      for (std::size_t c = 0; c < b[i].size(); ++c) out.bias[r] += prod[r][c] * b[i][c];
  }
  return out;
}

// Naive grouping of row indices by oracle pattern.
inline std::map<std::string, std::vector<std::size_t>> brute_force_groups(const Network& net,
                                                                         const Eigen::MatrixXd& rows) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Vec u(rows.cols());
    for (Eigen::Index k = 0; k < rows.cols(); ++k) u[k] = rows(i, k);
    groups[oracle_forward(net, u).pattern].push_back(static_cast<std::size_t>(i));
  }
  return groups;
}

// Mean BCE-with-logits plus activity penalty, from the oracle forward pass.
// l1: |a|, l2: a^2; mean_units divides each layer's sum by its width.
inline double oracle_objective(const Network& net, const Eigen::MatrixXd& x, const std::vector<int>& t,
                               double coeff, bool l1, bool mean_units) {
  const auto layers = net.layers();
  double loss = 0.0, penalty = 0.0;
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    Vec a(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) a[k] = x(n, k);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      Vec z(layers[i].weight.rows());
      for (std::size_t r = 0; r < z.size(); ++r) {
        z[r] = layers[i].bias[r];
        for (std::size_t c = 0; c < a.size(); ++c) z[r] += layers[i].weight(r, c) * a[c];
      }
      if (i + 1 == layers.size()) {
        const double p = 1.0 / (1.0 + std::exp(-z[0]));
        loss += -(t[n] * std::log(p) + (1 - t[n]) * std::log(1.0 - p));
        break;
      }
      double layer_pen = 0.0;
      for (double& v : z) {
        v = std::max(v, 0.0);
        layer_pen += l1 ? std::abs(v) : v * v;
      }
      penalty += mean_units ? layer_pen / z.size() : layer_pen;
      a = z;
    }
  }
  return (loss + coeff * penalty) / x.rows();
}

}  // namespace relu_prism::testing
