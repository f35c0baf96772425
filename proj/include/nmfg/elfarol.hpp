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
#ifndef NMFG_ELFAROL_HPP_
#define NMFG_ELFAROL_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "nmfg/autodiff.hpp"
#include "nmfg/meeting.hpp"
#include "nmfg/mfg.hpp"
#include "nmfg/mlp.hpp"

namespace nmfg {

struct BarConfig {
  double c = 0.9;  // crowding threshold
  int agents = 200;
  int turns = 15;
  double init_low = 0.0;  // initial p ~ U[init_low, init_high)
  double init_high = 0.1;
  double drift_gain = 0.3;
  double smoothing = 0.05;  // Huber width of the hinge inside the drift
  double residual_scale = 1.0;
  // Observed rates are matched against the last `observed_turns` turns.
  int observed_turns = 10;
};

void validate(const BarConfig &config);

/// Missed evening [c - p]_+ (stayed home, a < c), crowding [p - c]_+ (went,
/// a >= c), peer pressure (p - a)^2.
template <typename Scalar>
Scalar bar_cost(const Scalar &p, const Scalar &a, double c, bool went) {
  Scalar cost = square(p - a);
  if (!went && value_of(a) < c) cost += max0(c - p);
  if (went && value_of(a) >= c) cost += max0(p - c);
  return cost;
}

/// bar_cost averaged over the agent's own Bernoulli(p) attendance.
template <typename Scalar>
Scalar expected_bar_cost(const Scalar &p, const Scalar &a, double c) {
  Scalar cost = square(p - a);
  if (value_of(a) < c) {
    cost += (1.0 - p) * max0(c - p);
  } else {
    cost += p * max0(p - c);
  }
  return cost;
}

struct Attendance {
  std::vector<bool> went;
  double a = 0.0;
};

Attendance sample_attendance(const Eigen::VectorXd &p, std::mt19937_64 &rng);
Attendance sample_attendance(const Eigen::VectorXd &p, std::uint64_t seed);

/// `series` observed attendance series of `turns` rates each. Every series
/// draws a population of intentions from the mixture recipe (clamped to
/// [0, 1]) and records the attended fraction on each turn.
std::vector<Eigen::VectorXd> generate_attendance_observations(
    int groups, int per_group, std::uint64_t seed, int series = 10,
    int turns = 10, const MixtureRecipe &recipe = {0.2, 0.05, 2.0, 0.02});

struct BarSnapshot {
  int turn = 0;
  Eigen::VectorXd p;
  std::vector<bool> went;
  double a = 0.0;  // realized attendance
};

using BarHistory = std::vector<BarSnapshot>;

/// Network shape for the residual drift: inputs (t, p, a).
MlpConfig bar_net_config(std::uint64_t seed);

template <typename Scalar>
struct BarOutcome {
  std::vector<Vector<Scalar>> p;  // one vector per turn
};

/// Deterministic gradient-flow dynamics on p (no Brownian term) with an
/// optional network residual; p is clamped to [0, 1] after every step.
/// Attendance is sampled every turn for the record only.
template <typename Scalar>
BarOutcome<Scalar> simulate_bar(const BarConfig &config,
                                const MlpParams<Scalar> *params,
                                std::uint64_t seed,
                                BarHistory *history = nullptr);

BarHistory run_standard(const BarConfig &config, std::uint64_t seed);

class BarGame : public NeuralGame {
 public:
  BarGame(BarConfig config, std::vector<Eigen::VectorXd> observations,
          MlpConfig net_config);

  std::vector<Mlp *> networks() override { return {&net_}; }
  LossTerms play(Tape &tape, std::span<const MlpParams<Var>> params,
                 const GameIndex &index) const override;

  const Mlp &net() const { return net_; }
  BarHistory simulate(std::uint64_t seed) const;

 private:
  BarConfig config_;
  std::vector<Eigen::VectorXd> observations_;
  Mlp net_;
};

struct BarNeuralResult {
  Mlp net;
  TrainingHistory training;
  BarHistory history;
};

BarNeuralResult run_neural(const BarConfig &config,
                           const std::vector<Eigen::VectorXd> &observations,
                           const TrainingConfig &training,
                           const MlpConfig &net_config, std::uint64_t eval_seed);

/// Unilateral deviations in p, scored by the expected cost with the
/// attendance recomputed.
class BarProbe : public ProbeGame {
 public:
  explicit BarProbe(double c) : c_(c) {}
  double control_of(const PopulationState &pop, Eigen::Index agent) const override;
  double agent_cost(const PopulationState &pop, Eigen::Index agent,
                    double control) const override;

 private:
  double c_;
};

/// `turn,agent,p,went`.
void write_bar_csv(const std::filesystem::path &path, const BarHistory &history);

}  // namespace nmfg

#endif  // NMFG_ELFAROL_HPP_
