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
#include "nmfg/elfarol.hpp"

#include <algorithm>

#include "nmfg/csv.hpp"
#include "nmfg/sde.hpp"

namespace nmfg {

void validate(const BarConfig &c) {
  if (!(c.c > 0.0 && c.c < 1.0)) {
    throw std::invalid_argument("elfarol: threshold must lie in (0, 1)");
  }
  if (c.agents < 1) throw std::invalid_argument("elfarol: agents must be >= 1");
  if (c.turns < 1) throw std::invalid_argument("elfarol: turns must be >= 1");
  if (!(c.init_low >= 0.0 && c.init_low < c.init_high && c.init_high <= 1.0)) {
    throw std::invalid_argument("elfarol: bad initial interval");
  }
  if (!(c.smoothing > 0.0)) {
    throw std::invalid_argument("elfarol: smoothing must be > 0");
  }
  if (c.observed_turns < 1 || c.observed_turns > c.turns) {
    throw std::invalid_argument("elfarol: observed_turns outside [1, turns]");
  }
}

Attendance sample_attendance(const Eigen::VectorXd &p, std::mt19937_64 &rng) {
  Attendance out;
  out.went.resize(static_cast<std::size_t>(p.size()));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long count = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p(i) >= 0.0 && p(i) <= 1.0)) {
      throw std::invalid_argument("sample_attendance: p outside [0, 1]");
    }
    const bool went = u(rng) < p(i);
    out.went[static_cast<std::size_t>(i)] = went;
    count += went;
  }
  out.a = p.size() > 0 ? static_cast<double>(count) / p.size() : 0.0;
  return out;
}

Attendance sample_attendance(const Eigen::VectorXd &p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_attendance(p, rng);
}

std::vector<Eigen::VectorXd> generate_attendance_observations(
    int groups, int per_group, std::uint64_t seed, int series, int turns,
    const MixtureRecipe &recipe) {
  if (series < 1 || turns < 1) {
    throw std::invalid_argument("attendance observations: sizes must be >= 1");
  }
  std::vector<Eigen::VectorXd> out;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < series; ++k) {
    const auto draws =
        generate_observations(groups, per_group, derive_seed(seed, k), recipe);
    Eigen::VectorXd p(static_cast<Eigen::Index>(draws.size()));
    for (std::size_t i = 0; i < draws.size(); ++i) {
      p(static_cast<Eigen::Index>(i)) = std::clamp(draws[i], 0.0, 1.0);
    }
    Eigen::VectorXd rates(turns);
    for (int t = 0; t < turns; ++t) rates(t) = sample_attendance(p, rng).a;
    out.push_back(std::move(rates));
  }
  return out;
}

MlpConfig bar_net_config(std::uint64_t seed) {
  return MlpConfig{3, 1, 3, 16, seed};
}

namespace {

// Huber-smoothed hinge [u]_+ and its slope.
template <typename Scalar>
Scalar huber(const Scalar &u, double eta) {
  const double v = value_of(u);
  if (v <= 0.0) return Scalar(0.0);
  if (v < eta) return u * u / (2.0 * eta);
  return u - 0.5 * eta;
}

template <typename Scalar>
Scalar huber_slope(const Scalar &u, double eta) {
  return max0(u / eta) - max0(u / eta - 1.0);
}

// Gradient of the smoothed expected cost with respect to the agent's own p,
// holding the attendance a fixed.
template <typename Scalar>
Scalar cost_gradient(const Scalar &p, const Scalar &a, double c, double eta) {
  Scalar g = 2.0 * (p - a);
  if (value_of(a) < c) {
    g -= huber<Scalar>(c - p, eta) + (1.0 - p) * huber_slope<Scalar>(c - p, eta);
  } else {
    g += huber<Scalar>(p - c, eta) + p * huber_slope<Scalar>(p - c, eta);
  }
  return g;
}

template <typename Scalar>
struct BarContext {
  Scalar a;
};

}  // namespace

template <typename Scalar>
BarOutcome<Scalar> simulate_bar(const BarConfig &config,
                                const MlpParams<Scalar> *params,
                                std::uint64_t seed, BarHistory *history) {
  validate(config);
  const int n = config.agents;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(config.init_low, config.init_high);
  Eigen::VectorXd p0(n);
  for (int i = 0; i < n; ++i) p0(i) = init(rng);
  std::mt19937_64 attend_rng(derive_seed(seed, 2));

  using Ctx = BarContext<Scalar>;
  SdeProblem<Scalar, Ctx> problem;
  const double c = config.c, eta = config.smoothing, gain = config.drift_gain;
  problem.base_drift = [=](double, const Vector<Scalar> &p, const Ctx &ctx) {
    Vector<Scalar> b(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      b(i) = -gain * cost_gradient<Scalar>(p(i), ctx.a, c, eta);
    }
    return b;
  };
  if (params != nullptr) {
    const double t_scale = 1.0 / config.turns;
    const double r_scale = config.residual_scale;
    problem.neural_drift = [=](double t, const Vector<Scalar> &p,
                               const Ctx &ctx) {
      Vector<Scalar> mu(p.size());
      Vector<Scalar> in(3);
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        in << Scalar(t * t_scale), p(i), ctx.a;
        mu(i) = r_scale * mlp_forward(*params, in)(0);
      }
      return mu;
    };
  }

  auto record = [&](int turn, const Vector<Scalar> &p) {
    if (history == nullptr) return;
    const Eigen::VectorXd pv = values_of(p);
    Attendance att = sample_attendance(pv, attend_rng);
    history->push_back({turn, pv, std::move(att.went), att.a});
  };

  const TimeGrid grid(1.0, static_cast<double>(config.turns), config.turns - 1);
  const auto traj = integrate<Scalar, Ctx>(
      problem, p0.cast<Scalar>(), grid, BrownianPath{},
      [&](int k, double, const Vector<Scalar> &p) {
        record(k + 1, p);
        return Ctx{p.mean()};
      },
      [](int, const Vector<Scalar> &p) {
        return Vector<Scalar>(p.unaryExpr([](const Scalar &v) {
          return clamp_straight_through(v, 0.0, 1.0);
        }));
      });
  record(config.turns, traj.back());
  return {traj};
}

template BarOutcome<double> simulate_bar(const BarConfig &,
                                         const MlpParams<double> *,
                                         std::uint64_t, BarHistory *);
template BarOutcome<Var> simulate_bar(const BarConfig &, const MlpParams<Var> *,
                                      std::uint64_t, BarHistory *);

BarHistory run_standard(const BarConfig &config, std::uint64_t seed) {
  BarHistory history;
  simulate_bar<double>(config, nullptr, seed, &history);
  return history;
}

BarGame::BarGame(BarConfig config, std::vector<Eigen::VectorXd> observations,
                 MlpConfig net_config)
    : config_(config),
      observations_(std::move(observations)),
      net_(mlp_init(net_config)) {
  validate(config_);
  if (observations_.empty()) {
    throw std::invalid_argument("elfarol: observations are empty");
  }
  for (const auto &o : observations_) {
    if (o.size() < config_.observed_turns) {
      throw std::invalid_argument("elfarol: observation series too short");
    }
  }
  if (net_config.input_dim != 3 || net_config.output_dim != 1) {
    throw std::invalid_argument("elfarol: network must map 3 -> 1");
  }
}

LossTerms BarGame::play(Tape &, std::span<const MlpParams<Var>> params,
                        const GameIndex &index) const {
  const auto out = simulate_bar<Var>(config_, &params[0], index.seed);
  const Vector<Var> &last = out.p.back();
  const Var a = last.mean();
  Var cost(0.0);
  for (Eigen::Index i = 0; i < last.size(); ++i) {
    cost += expected_bar_cost(last(i), a, config_.c);
  }
  cost /= static_cast<double>(last.size());

  const auto &obs = observations_[static_cast<std::size_t>(index.game) % observations_.size()];
  const int k = config_.observed_turns;
  const int first = config_.turns - k;
  Var data(0.0);
  for (int t = 0; t < k; ++t) {
    data += square(out.p[static_cast<std::size_t>(first + t)].mean() - obs(t));
  }
  return {cost, data / static_cast<double>(k)};
}

BarHistory BarGame::simulate(std::uint64_t seed) const {
  BarHistory history;
  simulate_bar<double>(config_, &net_.params(), seed, &history);
  return history;
}

BarNeuralResult run_neural(const BarConfig &config,
                           const std::vector<Eigen::VectorXd> &observations,
                           const TrainingConfig &training,
                           const MlpConfig &net_config, std::uint64_t eval_seed) {
  BarGame game(config, observations, net_config);
  TrainingHistory h = train(game, training);
  return {game.net(), std::move(h), game.simulate(eval_seed)};
}

double BarProbe::control_of(const PopulationState &pop,
                            Eigen::Index agent) const {
  return pop.agents(agent, 0);
}

double BarProbe::agent_cost(const PopulationState &pop, Eigen::Index agent,
                            double control) const {
  const double n = static_cast<double>(pop.size());
  const double a =
      (pop.agents.col(0).sum() - pop.agents(agent, 0) + control) / n;
  return expected_bar_cost(control, a, c_);
}

void write_bar_csv(const std::filesystem::path &path, const BarHistory &history) {
  CsvWriter out(path, {"turn", "agent", "p", "went"});
  for (const auto &snap : history) {
    for (Eigen::Index i = 0; i < snap.p.size(); ++i) {
      out.cell(snap.turn).cell(static_cast<long long>(i)).cell(snap.p(i));
      out.cell(snap.went[static_cast<std::size_t>(i)] ? 1 : 0);
      out.end_row();
    }
  }
}

}  // namespace nmfg
