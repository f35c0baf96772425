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
#include <random>
#include <vector>

#include "nmfg/elfarol.hpp"

using nmfg::BarConfig;

TEST_CASE("bar cost examples") {
  CHECK(nmfg::bar_cost<double>(0.9, 0.9, 0.9, true) == 0.0);
  CHECK(nmfg::bar_cost<double>(0.9, 0.9, 0.9, false) == 0.0);
  CHECK(nmfg::bar_cost<double>(0.2, 0.5, 0.9, false) == doctest::Approx(0.79));
  CHECK(nmfg::bar_cost<double>(1.0, 0.95, 0.9, true) ==
        doctest::Approx(0.1025));
}

TEST_CASE("bar cost is selective") {
  // Attendees never pay the missed-evening term, absentees never the crowd.
  CHECK(nmfg::bar_cost<double>(0.2, 0.5, 0.9, true) == doctest::Approx(0.09));
  CHECK(nmfg::bar_cost<double>(1.0, 0.95, 0.9, false) ==
        doctest::Approx(0.0025));
}

TEST_CASE("attendance sampling") {
  CHECK(nmfg::sample_attendance(Eigen::VectorXd::Zero(50), 1).a == 0.0);
  CHECK(nmfg::sample_attendance(Eigen::VectorXd::Ones(50), 1).a == 1.0);
  const auto half = nmfg::sample_attendance(Eigen::VectorXd::Constant(10000, 0.5), 2);
  CHECK(std::abs(half.a - 0.5) < 0.015);
  CHECK(half.went.size() == 10000);
  Eigen::VectorXd bad(2);
  bad << 0.5, 1.5;
  CHECK_THROWS_AS(nmfg::sample_attendance(bad, 1), std::invalid_argument);
}

TEST_CASE("attendance observations") {
  double total = 0.0;
  int count = 0;
  for (int r = 0; r < 10; ++r) {
    const auto obs = nmfg::generate_attendance_observations(10, 20, 30 + r);
    REQUIRE(obs.size() == 10);
    for (const auto &series : obs) {
      REQUIRE(series.size() == 10);
      CHECK((series.array() >= 0.0).all());
      CHECK((series.array() <= 1.0).all());
      total += series.sum();
      count += static_cast<int>(series.size());
    }
  }
  CHECK(std::abs(total / count - 0.2) < 0.05);
  const auto a = nmfg::generate_attendance_observations(4, 5, 8);
  const auto b = nmfg::generate_attendance_observations(4, 5, 8);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("standard bar game converges to the threshold") {
  BarConfig config;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto h = nmfg::run_standard(config, seed);
    REQUIRE(h.size() == static_cast<std::size_t>(config.turns));
    CHECK(std::abs(h.back().p.mean() - config.c) < 0.05);
    for (std::size_t t = 2; t < h.size(); ++t) {
      CHECK(std::abs(h[t].p.mean() - config.c) <=
            std::abs(h[t - 1].p.mean() - config.c) + 1e-12);
    }
    for (const auto &snap : h) {
      CHECK((snap.p.array() >= 0.0).all());
      CHECK((snap.p.array() <= 1.0).all());
      CHECK(snap.a >= 0.0);
      CHECK(snap.a <= 1.0);
    }
  }
}

TEST_CASE("initial probabilities are uniform on [0, 0.1)") {
  const auto h = nmfg::run_standard(BarConfig{}, 3);
  CHECK((h.front().p.array() >= 0.0).all());
  CHECK((h.front().p.array() < 0.1).all());
}

TEST_CASE("nash gap at the homogeneous threshold profile") {
  const nmfg::BarProbe probe(0.9);
  nmfg::PopulationState pop{Eigen::MatrixXd::Constant(100, 1, 0.9), 15.0};
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(0.1 * k);
  CHECK(probe.agent_cost(pop, 0, 0.9) == doctest::Approx(0.0));
  CHECK(nmfg::nash_gap(probe, pop, 0, grid) <= 1e-6);
}

TEST_CASE("nash gap is positive away from equilibrium") {
  const nmfg::BarProbe probe(0.9);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  nmfg::PopulationState pop{Eigen::MatrixXd(100, 1), 1.0};
  for (Eigen::Index i = 0; i < 100; ++i) pop.agents(i, 0) = u(rng);
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(0.1 * k);
  CHECK(nmfg::nash_gap(probe, pop, 0, grid) > 0.0);
}

TEST_CASE("neural bar game trains and keeps probabilities bounded") {
  BarConfig config;
  config.agents = 60;
  const auto obs = nmfg::generate_attendance_observations(10, 20, 4);
  nmfg::TrainingConfig training;
  training.epochs = 12;
  const auto r =
      nmfg::run_neural(config, obs, training, nmfg::bar_net_config(0), 9);
  CHECK(r.training.records.size() == 12);
  CHECK(r.history.size() == static_cast<std::size_t>(config.turns));
  for (const auto &snap : r.history) {
    CHECK((snap.p.array() >= 0.0).all());
    CHECK((snap.p.array() <= 1.0).all());
  }
}
