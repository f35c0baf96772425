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

#ifndef NMFG_MFG_HPP_
#define NMFG_MFG_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nmfg/autodiff.hpp"
#include "nmfg/mlp.hpp"
#include "nmfg/sde.hpp"

namespace nmfg {

/// N agent states (one row per agent) at time t.
struct PopulationState {
  Eigen::MatrixXd agents;
  double t = 0.0;

  Eigen::Index size() const { return agents.rows(); }
};

/// Game-specific summary of a population: an empirical distribution's
/// moments, a fraction, or compartment proportions.
struct MeanField {
  Eigen::VectorXd summary;
};

using Reducer = std::function<MeanField(const PopulationState &)>;

/// Throws std::invalid_argument for an empty population.
MeanField empirical_mean_field(const PopulationState &pop,
                               const Reducer &reducer);

namespace reducers {
// Per-column means followed by per-column (population) variances.
MeanField mean_variance(const PopulationState &pop);
// Fraction of nonzero entries in column 0.
MeanField fraction(const PopulationState &pop);
// Proportion of agents carrying each integer label 0..labels-1 in column 0.
Reducer proportions(int labels);
}  // namespace reducers

/// Running cost L and terminal cost G of J = int 1/2 L ds + G.
template <typename Scalar>
struct CostSpec {
  using Vec = Vector<Scalar>;
  std::function<Scalar(double t, const Vec &x, const Vec &m, const Vec &control,
                       const Eigen::VectorXd &observation)>
      running;
  std::function<Scalar(const Vec &x_T, const Vec &m_T)> terminal;
};

/// Left Riemann sum of 1/2 L over the grid plus G at the last grid point.
/// `trajectory` and `mean_fields` hold n_steps + 1 entries; `controls` and
/// `observations` hold at least n_steps (they may be empty if L is unset).
template <typename Scalar>
Scalar evaluate_cost(const CostSpec<Scalar> &spec, const TimeGrid &grid,
                     const std::vector<Vector<Scalar>> &trajectory,
                     const std::vector<Vector<Scalar>> &mean_fields,
                     const std::vector<Vector<Scalar>> &controls,
                     const std::vector<Eigen::VectorXd> &observations) {
  const auto points = static_cast<std::size_t>(grid.n_steps) + 1;
  if (trajectory.size() != points || mean_fields.size() != points) {
    throw std::invalid_argument("evaluate_cost: misaligned trajectory");
  }
  Scalar cost(0.0);
  if (spec.running) {
    const auto steps = static_cast<std::size_t>(grid.n_steps);
    if (controls.size() < steps || observations.size() < steps) {
      throw std::invalid_argument("evaluate_cost: misaligned controls");
    }
    for (std::size_t k = 0; k < steps; ++k) {
      cost += 0.5 * grid.dt() *
              spec.running(grid.time(static_cast<int>(k)), trajectory[k],
                           mean_fields[k], controls[k], observations[k]);
    }
  }
  if (spec.terminal) cost += spec.terminal(trajectory.back(), mean_fields.back());
  return cost;
}

/// game_cost + weight * data_discrepancy.
template <typename Scalar>
Scalar combined_loss(const Scalar &game_cost, const Scalar &data_discrepancy,
                     double weight) {
  if (weight < 0.0) throw std::invalid_argument("combined_loss: weight < 0");
  return game_cost + weight * data_discrepancy;
}

struct TrainingConfig {
  int epochs = 100;  // 0 trains nothing
  int games_per_epoch = 10;
  // Games per optimizer step; 0 means one step per epoch.
  int batch_size = 0;
  double lr = 5e-4;
  std::uint64_t seed = 0;
  double data_loss_weight = 1.0;
  double divergence_threshold = 1e6;
  // Worker threads for independent games. Gradients are always summed in
  // game order, so results do not depend on this value.
  int threads = 1;
};

/// Throws std::invalid_argument on a config that breaks its invariants.
void validate(const TrainingConfig &config);

class TrainingError : public std::runtime_error {
 public:
  TrainingError(int epoch, const std::string &what)
      : std::runtime_error("epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Identifies one game inside train(): its epoch, its index within the
/// epoch and the seed derived from both.
struct GameIndex {
  int epoch = 0;
  int game = 0;
  std::uint64_t seed = 0;
};

struct LossTerms {
  Var game_cost;
  Var data_loss;
};

/// A game whose dynamics carry shared neural fields. play() simulates one
/// game on `tape` using the bound parameters (one entry per network, in
/// networks() order) and returns its two loss terms. play() must not mutate
/// the game: it may be called concurrently on distinct tapes.
class NeuralGame {
 public:
  virtual ~NeuralGame() = default;
  virtual std::vector<Mlp *> networks() = 0;
  virtual LossTerms play(Tape &tape, std::span<const MlpParams<Var>> params,
                         const GameIndex &index) const = 0;
};

struct EpochRecord {
  int epoch = 0;
  double game_cost = 0.0;
  double data_loss = 0.0;
  double total = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> records;

  // Mean total loss over the first (or last) quarter of the epochs.
  double first_quartile_mean() const;
  double last_quartile_mean() const;
  void write_csv(const std::filesystem::path &path) const;
};

/// Deterministic 64-bit seed derivation (splitmix64 over the inputs).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0);

/// Per epoch: play games_per_epoch games, average combined losses over each
/// batch, backpropagate through the unrolled dynamics, and take one
/// AdaBelief step per network and batch. Throws TrainingError on a NaN loss
/// or when the epoch's mean loss exceeds the divergence threshold.
TrainingHistory train(NeuralGame &game, const TrainingConfig &config);

/// Agent-level probe used by nash_gap().
class ProbeGame {
 public:
  virtual ~ProbeGame() = default;
  virtual double control_of(const PopulationState &pop,
                            Eigen::Index agent) const = 0;
  // Cost of `agent` playing `control` while every other agent keeps its
  // current control.
  virtual double agent_cost(const PopulationState &pop, Eigen::Index agent,
                            double control) const = 0;
};

/// max over candidates of [J(current) - J(candidate)]_+ for one agent.
double nash_gap(const ProbeGame &game, const PopulationState &pop,
                Eigen::Index probe_agent, std::span<const double> candidates);

/// One agent starting at 0 on [0, 1] with dx = mu_theta(t, x) dt and terminal
/// cost (x_T - target)^2. Exercises train() end to end.
class QuadraticTargetGame : public NeuralGame {
 public:
  QuadraticTargetGame(MlpConfig net_config, double target, int steps);

  std::vector<Mlp *> networks() override { return {&net_}; }
  LossTerms play(Tape &tape, std::span<const MlpParams<Var>> params,
                 const GameIndex &index) const override;
  double terminal_state() const;

 private:
  template <typename Scalar>
  Scalar simulate(const MlpParams<Scalar> &params) const;

  Mlp net_;
  double target_;
  TimeGrid grid_;
};

}  // namespace nmfg

#endif  // NMFG_MFG_HPP_
