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
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "nmfg/adabelief.hpp"
#include "nmfg/mlp.hpp"

using nmfg::Mlp;
using nmfg::MlpConfig;

TEST_CASE("lipswish values") {
  CHECK(nmfg::lipswish(0.0) == 0.0);
  CHECK(nmfg::lipswish(20.0) == doctest::Approx(20.0 / 1.1).epsilon(1e-7));
}

TEST_CASE("lipswish derivative bounded by one") {
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = -10.0 + i * 1e-3;
    const double s = nmfg::sigmoid(x);
    const double d = (s + x * s * (1.0 - s)) / 1.1;
    worst = std::max(worst, std::abs(d));
  }
  CHECK(worst <= 1.0);
  CHECK(worst > 0.99);
}

TEST_CASE("init is deterministic and bounded") {
  const MlpConfig config{2, 1, 3, 8, 7};
  const Mlp a = nmfg::mlp_init(config);
  const Mlp b = nmfg::mlp_init(config);
  CHECK(a.flat() == b.flat());
  for (const auto &w : a.params().weights) {
    CHECK(w.cwiseAbs().maxCoeff() <= std::sqrt(1.0 / w.cols()));
  }
  for (const auto &bias : a.params().biases) CHECK(bias.isZero());
  CHECK(nmfg::within_reference_ranges(config));
  CHECK_FALSE(nmfg::within_reference_ranges(MlpConfig{2, 1, 2, 8, 0}));
}

TEST_CASE("fresh net maps zero to zero") {
  const Mlp net = nmfg::mlp_init(MlpConfig{4, 3, 5, 16, 3});
  const Eigen::VectorXd y = nmfg::mlp_forward(net, Eigen::VectorXd::Zero(4));
  CHECK(y.isZero(0.0));
}

TEST_CASE("invalid dimensions rejected") {
  CHECK_THROWS_AS(nmfg::mlp_init(MlpConfig{0, 1, 3, 8, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(nmfg::mlp_init(MlpConfig{1, 1, 3, 0, 0}),
                  std::invalid_argument);
  const Mlp net = nmfg::mlp_init(MlpConfig{2, 1, 3, 8, 0});
  CHECK_THROWS_AS(nmfg::mlp_forward(net, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("identity single-layer net") {
  nmfg::MlpParams<double> p;
  p.weights.push_back(Eigen::MatrixXd::Ones(1, 1));
  p.biases.push_back(Eigen::VectorXd::Zero(1));
  const Mlp net(MlpConfig{1, 1, 0, 0, 0}, p);
  CHECK(nmfg::mlp_forward(net, Eigen::VectorXd::Constant(1, 2.0))(0) == 2.0);
}

TEST_CASE("weight gradients match finite differences") {
  Mlp net = nmfg::mlp_init(MlpConfig{3, 2, 3, 8, 21});
  // Nonzero biases so every parameter matters.
  Eigen::VectorXd theta = net.flat();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.3);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += n(rng);
  net.set_flat(theta);
  Eigen::VectorXd x(3);
  x << 0.4, -1.2, 0.9;
  auto loss = [&](const Mlp &m) {
    const Eigen::VectorXd y = nmfg::mlp_forward(m, x);
    return y(0) + 0.5 * y(1) * y(1);
  };
  nmfg::Tape tape;
  const auto bound = nmfg::bind(net, tape);
  const nmfg::Vector<nmfg::Var> y = nmfg::mlp_forward(bound, x.cast<nmfg::Var>().eval());
  tape.backward(y(0) + 0.5 * y(1) * y(1));
  const Eigen::VectorXd g = nmfg::gradient_of(bound);
  CHECK(y(0).value() == doctest::Approx(nmfg::mlp_forward(net, x)(0)));
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Mlp up = net, down = net;
    Eigen::VectorXd t = theta;
    t(i) += h;
    up.set_flat(t);
    t(i) -= 2 * h;
    down.set_flat(t);
    const double fd = (loss(up) - loss(down)) / (2 * h);
    CHECK(std::abs(fd - g(i)) <= 1e-5);
  }
}

TEST_CASE("large inputs stay finite") {
  const Mlp net = nmfg::mlp_init(MlpConfig{2, 2, 8, 32, 9});
  Eigen::VectorXd x(2);
  x << 1e3, -1e3;
  CHECK(nmfg::mlp_forward(net, x).allFinite());
}

TEST_CASE("forward pass respects the spectral Lipschitz bound") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 2.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mlp net = nmfg::mlp_init(MlpConfig{3, 2, 4, 16, seed});
    const double lip = nmfg::lipschitz_bound(net);
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd a(3), b(3);
      for (int i = 0; i < 3; ++i) {
        a(i) = n(rng);
        b(i) = n(rng);
      }
      const double lhs =
          (nmfg::mlp_forward(net, a) - nmfg::mlp_forward(net, b)).norm();
      CHECK(lhs <= lip * (a - b).norm() * (1.0 + 1e-3));
    }
  }
}

TEST_CASE("checkpoint round trip is exact") {
  const Mlp net = nmfg::mlp_init(MlpConfig{3, 2, 3, 8, 99});
  const Mlp back = nmfg::mlp_from_json(nmfg::to_json(net));
  CHECK(back.flat() == net.flat());
  CHECK(back.config().hidden_width == 8);
  const auto path = std::filesystem::temp_directory_path() / "nmfg_ckpt.json";
  nmfg::save_checkpoint(net, path);
  CHECK(nmfg::load_checkpoint(path).flat() == net.flat());
  std::filesystem::remove(path);
  CHECK_THROWS(nmfg::mlp_from_json("{\"format\": \"other\"}"));
}

TEST_CASE("adabelief defaults") {
  const nmfg::AdaBeliefOptions o;
  CHECK(o.lr == 5e-4);
  CHECK(o.beta1 == 0.9);
  CHECK(o.beta2 == 0.999);
  CHECK(o.eps == 1e-16);
}

TEST_CASE("adabelief zero gradient leaves parameters unchanged") {
  Eigen::VectorXd theta(3);
  theta << 1.0, -2.0, 0.5;
  const Eigen::VectorXd start = theta;
  nmfg::AdaBeliefState state(3);
  for (int i = 0; i < 100; ++i) {
    nmfg::adabelief_step(theta, Eigen::VectorXd::Zero(3), state);
  }
  CHECK(theta == start);
}

TEST_CASE("adabelief minimizes theta squared") {
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
  nmfg::AdaBeliefState state(1);
  std::vector<double> trace;
  for (int i = 0; i < 5000; ++i) {
    nmfg::adabelief_step(theta, 2.0 * theta, state);
    trace.push_back(theta(0) * theta(0));
    CHECK(state.s.minCoeff() >= 0.0);
  }
  CHECK(std::abs(theta(0)) < 0.01);
  // Monotone decrease after warm-up, until the iterate reaches the noise
  // floor around the minimum.
  for (std::size_t i = 11; i < trace.size() && trace[i] > 1e-4; ++i) {
    CHECK(trace[i] <= trace[i - 1]);
  }
}

TEST_CASE("adabelief rejects bad gradients") {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
  nmfg::AdaBeliefState state(2);
  Eigen::VectorXd g(2);
  g << 1.0, std::nan("");
  CHECK_THROWS_AS(nmfg::adabelief_step(theta, g, state), std::invalid_argument);
  CHECK_THROWS_AS(nmfg::adabelief_step(theta, Eigen::VectorXd::Zero(3), state),
                  std::invalid_argument);
}
