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
#include <fstream>

#include "nmfg/csv.hpp"
#include "nmfg/mlp.hpp"
#include "nmfg/sde.hpp"

using nmfg::BrownianPath;
using nmfg::SdeProblem;
using nmfg::TimeGrid;
using nmfg::Var;

namespace {

struct Empty {};

template <typename S>
SdeProblem<S, Empty> constant_problem(double b, double sigma) {
  SdeProblem<S, Empty> p;
  p.base_drift = [b](double, const nmfg::Vector<S> &x, const Empty &) {
    return nmfg::Vector<S>(nmfg::Vector<S>::Constant(x.size(), S(b)));
  };
  p.fixed_diffusion = [sigma](double, const nmfg::Vector<S> &x, const Empty &) {
    return nmfg::Vector<S>(nmfg::Vector<S>::Constant(x.size(), S(sigma)));
  };
  return p;
}

template <typename S>
nmfg::Vector<S> scalar(double v) {
  return nmfg::Vector<S>::Constant(1, S(v));
}

const auto no_context = [](int, double, const Eigen::VectorXd &) {
  return Empty{};
};

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g(0.0, 2.0, 4);
  CHECK(g.dt() == 0.5);
  CHECK(g.time(3) == 1.5);
  CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, -1), std::invalid_argument);
}

TEST_CASE("brownian path") {
  const TimeGrid g(0.0, 1.0, 10);
  CHECK(nmfg::sample_brownian(g, 0, 3).increments.size() == 0);
  const auto a = nmfg::sample_brownian(g, 2, 3);
  const auto b = nmfg::sample_brownian(g, 2, 3);
  CHECK(a.increments == b.increments);
  CHECK(a.increments.rows() == 10);
  CHECK(a.increments.cols() == 2);
}

TEST_CASE("brownian increment statistics") {
  const TimeGrid g(0.0, 1.0, 100000);
  const auto p = nmfg::sample_brownian(g, 1, 42);
  const double dt = g.dt();
  const double mean = p.increments.mean();
  const double var = (p.increments.array() - mean).square().mean();
  CHECK(std::abs(mean) < 3.0 * std::sqrt(dt / 1e5));
  CHECK(var == doctest::Approx(dt).epsilon(0.02));
}

TEST_CASE("em_step basics") {
  const Eigen::VectorXd dB = Eigen::VectorXd::Constant(1, 0.3);
  const auto frozen = constant_problem<double>(0.0, 0.0);
  CHECK(nmfg::em_step(scalar<double>(1.5), 0.0, 0.1, frozen, Empty{}, dB)(0) ==
        1.5);
  const auto drift = constant_problem<double>(1.0, 0.0);
  CHECK(nmfg::em_step(scalar<double>(0.0), 0.0, 0.1, drift, Empty{}, dB)(0) ==
        doctest::Approx(0.1));
  const auto noisy = constant_problem<double>(0.0, 2.0);
  CHECK(nmfg::em_step(scalar<double>(0.0), 0.0, 0.1, noisy, Empty{}, dB)(0) ==
        doctest::Approx(0.6));
}

TEST_CASE("em_step uses |neural diffusion|") {
  auto p = constant_problem<double>(0.0, 5.0);
  p.neural_diffusion = [](double, const Eigen::VectorXd &x, const Empty &) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(x.size(), -2.0));
  };
  const Eigen::VectorXd dB = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(nmfg::em_step(scalar<double>(0.0), 0.0, 0.1, p, Empty{}, dB)(0) ==
        doctest::Approx(1.0));
}

TEST_CASE("non-finite states report the step") {
  SdeProblem<double, Empty> p;
  p.base_drift = [](double t, const Eigen::VectorXd &x, const Empty &) {
    return Eigen::VectorXd(t > 0.25 ? Eigen::VectorXd::Constant(x.size(), INFINITY)
                                    : Eigen::VectorXd::Zero(x.size()));
  };
  const TimeGrid g(0.0, 1.0, 10);
  try {
    nmfg::integrate<double, Empty>(p, scalar<double>(0.0), g, BrownianPath{},
                                   no_context);
    FAIL("expected IntegrationError");
  } catch (const nmfg::IntegrationError &e) {
    CHECK(e.step() == 3);
  }
}

TEST_CASE("empty grid returns x0") {
  const auto p = constant_problem<double>(1.0, 0.0);
  const auto traj = nmfg::integrate<double, Empty>(
      p, scalar<double>(2.0), TimeGrid(0.0, 1.0, 0), BrownianPath{}, no_context);
  REQUIRE(traj.size() == 1);
  CHECK(traj[0](0) == 2.0);
}

TEST_CASE("linear ODE decays to exp(-1)") {
  SdeProblem<double, Empty> p;
  p.base_drift = [](double, const Eigen::VectorXd &x, const Empty &) {
    return Eigen::VectorXd(-x);
  };
  const auto traj = nmfg::integrate<double, Empty>(
      p, scalar<double>(1.0), TimeGrid(0.0, 1.0, 1000), BrownianPath{},
      no_context);
  CHECK(std::abs(traj.back()(0) - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("geometric Brownian motion strong order one half") {
  SdeProblem<double, Empty> p;
  p.base_drift = [](double, const Eigen::VectorXd &x, const Empty &) {
    return Eigen::VectorXd(0.5 * x);
  };
  p.fixed_diffusion = [](double, const Eigen::VectorXd &x, const Empty &) {
    return Eigen::VectorXd(0.2 * x);
  };
  const int fine = 1000;
  const TimeGrid fine_grid(0.0, 1.0, fine);
  std::vector<double> errors;
  for (int steps : {10, 100, 1000}) {
    double total = 0.0;
    for (int path = 0; path < 200; ++path) {
      const auto w = nmfg::sample_brownian(fine_grid, 1, 1000 + path);
      // Aggregate the fine increments onto the coarse grid.
      BrownianPath coarse;
      coarse.increments = Eigen::MatrixXd::Zero(steps, 1);
      const int ratio = fine / steps;
      for (int k = 0; k < fine; ++k) coarse.increments(k / ratio, 0) += w.increments(k, 0);
      const auto traj = nmfg::integrate<double, Empty>(
          p, scalar<double>(1.0), TimeGrid(0.0, 1.0, steps), coarse, no_context);
      const double exact = std::exp(0.48 + 0.2 * w.increments.sum());
      total += std::abs(traj.back()(0) - exact);
    }
    errors.push_back(total / 200.0);
  }
  const double slope1 = std::log10(errors[0] / errors[1]);
  const double slope2 = std::log10(errors[1] / errors[2]);
  const double slope = 0.5 * (slope1 + slope2);
  MESSAGE("GBM strong errors " << errors[0] << " " << errors[1] << " "
                               << errors[2] << " slope " << slope);
  CHECK(slope > 0.35);
  CHECK(slope < 1.2);
  CHECK(errors[2] < errors[0]);
}

TEST_CASE("terminal loss gradient through a neural drift") {
  nmfg::Mlp net = nmfg::mlp_init(nmfg::MlpConfig{2, 2, 3, 8, 4});
  Eigen::VectorXd theta = net.flat();
  theta.array() += 0.05;
  net.set_flat(theta);
  const TimeGrid grid(0.0, 1.0, 8);
  const auto path = nmfg::sample_brownian(grid, 2, 9);
  Eigen::VectorXd x0(2);
  x0 << 0.5, -0.3;
  auto run = [&](const auto &params) {
    using S = typename std::decay_t<decltype(params.weights[0])>::Scalar;
    SdeProblem<S, Empty> p;
    p.base_drift = [](double, const nmfg::Vector<S> &x, const Empty &) {
      return nmfg::Vector<S>(-0.5 * x);
    };
    p.neural_drift = [&](double t, const nmfg::Vector<S> &x, const Empty &) {
      nmfg::Vector<S> in(2);
      in << S(t), x(0) + x(1);
      return nmfg::mlp_forward(params, in);
    };
    p.fixed_diffusion = [](double, const nmfg::Vector<S> &x, const Empty &) {
      return nmfg::Vector<S>(nmfg::Vector<S>::Constant(x.size(), S(0.3)));
    };
    const auto traj = nmfg::integrate<S, Empty>(
        p, x0.cast<S>().eval(), grid, path,
        [](int, double, const nmfg::Vector<S> &) { return Empty{}; });
    return traj.back().squaredNorm();
  };
  nmfg::Tape tape;
  const auto bound = nmfg::bind(net, tape);
  const Var loss = run(bound);
  tape.backward(loss);
  const Eigen::VectorXd g = nmfg::gradient_of(bound);
  const double h = 1e-6;
  int checked = 0;
  for (Eigen::Index i = 0; i < theta.size(); i += 7) {
    nmfg::Mlp up = net, down = net;
    Eigen::VectorXd t = theta;
    t(i) += h;
    up.set_flat(t);
    t(i) -= 2 * h;
    down.set_flat(t);
    const double fd = (run(up.params()) - run(down.params())) / (2 * h);
    CHECK(std::abs(fd - g(i)) <= 1e-4 * std::max(1.0, std::abs(g(i))));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("trajectory csv") {
  const auto path = std::filesystem::temp_directory_path() / "nmfg_traj.csv";
  const TimeGrid g(0.0, 1.0, 2);
  std::vector<Eigen::VectorXd> traj(3, Eigen::VectorXd::Zero(2));
  traj[2] << 1.0, 2.0;
  nmfg::write_trajectory_csv(path, g, traj, {"a", "b"});
  const auto table = nmfg::read_csv(path);
  CHECK(table.header == std::vector<std::string>{"t", "a", "b"});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[2][2] == "2");
  std::filesystem::remove(path);
}
