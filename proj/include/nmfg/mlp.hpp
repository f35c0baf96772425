// Copyright 2026 The nmfg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NMFG_MLP_HPP_
#define NMFG_MLP_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "nmfg/autodiff.hpp"

namespace nmfg {

/// Shape and seed of a multilayer perceptron. The reference ranges for the
/// hidden stack are 3..8 layers of 8..32 units; games may go outside them
/// (tests use a bare affine map, for instance), so they are checked
/// separately by within_reference_ranges().
struct MlpConfig {
  int input_dim = 1;
  int output_dim = 1;
  int hidden_layers = 3;
  int hidden_width = 8;
  std::uint64_t seed = 0;
};

bool within_reference_ranges(const MlpConfig &config);

template <typename Scalar>
struct MlpParams {
  std::vector<Matrix<Scalar>> weights;  // weights[l] is out x in
  std::vector<Vector<Scalar>> biases;
};

/// x * sigmoid(x) / 1.1. The derivative of swish peaks at about 1.0998, so
/// the scaled activation is 1-Lipschitz.
template <typename Scalar>
Scalar lipswish(const Scalar &x) {
  return x * sigmoid(x) * (1.0 / 1.1);
}

class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpConfig config, MlpParams<double> params);

  const MlpConfig &config() const { return config_; }
  const MlpParams<double> &params() const { return params_; }
  MlpParams<double> &params() { return params_; }

  std::size_t parameter_count() const;
  // Layer-major flattening: for each layer the weights in row-major order,
  // then the biases.
  Eigen::VectorXd flat() const;
  void set_flat(const Eigen::VectorXd &flat);

  bool all_finite() const;

 private:
  MlpConfig config_;
  MlpParams<double> params_;
};

/// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights, zero biases.
/// Throws std::invalid_argument on non-positive dimensions.
Mlp mlp_init(const MlpConfig &config);

/// Registers every parameter of `net` as a leaf on `tape`.
MlpParams<Var> bind(const Mlp &net, Tape &tape);
/// Wraps the parameters as tape-less constants.
MlpParams<Var> constant_params(const Mlp &net);
/// Gradient of the last backward() with respect to bound parameters, in the
/// flat() ordering.
Eigen::VectorXd gradient_of(const MlpParams<Var> &bound);

namespace detail {

template <typename Scalar>
Vector<Scalar> affine(const Matrix<Scalar> &w, const Vector<Scalar> &b,
                      const Vector<Scalar> &x) {
  if constexpr (std::is_same_v<Scalar, Var>) {
    // One n-ary node per output keeps the tape small for wide layers.
    Vector<Var> out(w.rows());
    std::vector<Var> lhs(static_cast<std::size_t>(w.cols()) + 1);
    std::vector<Var> rhs(lhs.size());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        lhs[c] = w(r, c);
        rhs[c] = x(c);
      }
      lhs.back() = b(r);
      rhs.back() = Var(1.0);
      out(r) = dot(lhs, rhs);
    }
    return out;
  } else {
    return w * x + b;
  }
}

}  // namespace detail

/// Affine + LipSwish for every hidden layer, affine output layer.
template <typename Scalar>
Vector<Scalar> mlp_forward(const MlpParams<Scalar> &params,
                           const Vector<Scalar> &x) {
  if (params.weights.empty() || x.size() != params.weights.front().cols()) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  Vector<Scalar> h = x;
  const std::size_t layers = params.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    h = detail::affine(params.weights[l], params.biases[l], h);
    if (l + 1 < layers) {
      h = h.unaryExpr([](const Scalar &v) { return lipswish(v); });
    }
  }
  return h;
}

inline Eigen::VectorXd mlp_forward(const Mlp &net, const Eigen::VectorXd &x) {
  return mlp_forward(net.params(), x);
}

/// Upper bound on the Lipschitz constant: product of per-layer spectral norms
/// (LipSwish contributes a factor of at most one).
double lipschitz_bound(const Mlp &net);

// Checkpoint files are JSON:
//   {"format": "nmfg-mlp", "version": 1,
//    "config": {"input_dim", "output_dim", "hidden_layers", "hidden_width",
//               "seed"},
//    "layers": [{"weights": [[...], ...], "bias": [...]}, ...]}
// Doubles are written with 17 significant digits so a round trip is exact.
std::string to_json(const Mlp &net);
Mlp mlp_from_json(const std::string &text);
void save_checkpoint(const Mlp &net, const std::filesystem::path &path);
Mlp load_checkpoint(const std::filesystem::path &path);

}  // namespace nmfg

#endif  // NMFG_MLP_HPP_
