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
#include "nmfg/meeting.hpp"

#include <random>

#include "nmfg/csv.hpp"
#include "nmfg/sde.hpp"

namespace nmfg {

void validate(const MeetingConfig &c) {
  if (c.agents < 1) throw std::invalid_argument("meeting: agents must be >= 1");
  if (!(c.quorum > 0.0 && c.quorum <= 1.0)) {
    throw std::invalid_argument("meeting: quorum must lie in (0, 1]");
  }
  if (c.turns < 1) throw std::invalid_argument("meeting: turns must be >= 1");
  if (c.noise_std < 0.0 || c.init_std < 0.0 || c.diffusion < 0.0) {
    throw std::invalid_argument("meeting: negative spread");
  }
  if (!(c.smoothing > 0.0)) {
    throw std::invalid_argument("meeting: smoothing must be > 0");
  }
}

std::vector<double> generate_observations(int groups, int per_group,
                                          std::uint64_t seed,
                                          const MixtureRecipe &recipe) {
  if (groups < 1 || per_group < 1) {
    throw std::invalid_argument("generate_observations: sizes must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> center(recipe.center, recipe.center_std);
  std::gamma_distribution<double> spread(recipe.gamma_shape, recipe.gamma_scale);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(groups) * per_group);
  for (int g = 0; g < groups; ++g) {
    const double mu = center(rng);
    const double sigma = spread(rng);
    std::normal_distribution<double> draw(mu, sigma);
    for (int k = 0; k < per_group; ++k) out.push_back(draw(rng));
  }
  return out;
}

MlpConfig meeting_net_config(std::uint64_t seed) {
  return MlpConfig{3, 1, 3, 16, seed};
}

namespace {

// Slope of the smoothed hinge: clamp(u / eta, 0, 1).
template <typename Scalar>
Scalar hinge_slope(const Scalar &u, double eta) {
  return max0(u / eta) - max0(u / eta - 1.0);
}

template <typename Scalar>
struct MeetingContext {
  Scalar ts;
  Vector<Scalar> tau_tilde;
};

}  // namespace

template <typename Scalar>
MeetingOutcome<Scalar> simulate_meeting(const MeetingConfig &config,
                                        const MlpParams<Scalar> *params,
                                        std::uint64_t seed,
                                        MeetingHistory *history) {
  validate(config);
  const int n = config.agents;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init(config.init_mean, config.init_std);
  std::normal_distribution<double> offset(0.0, config.noise_std);
  Eigen::VectorXd tau0(n), eps(n);
  for (int i = 0; i < n; ++i) tau0(i) = init(rng);
  for (int i = 0; i < n; ++i) eps(i) = offset(rng);

  const TimeGrid grid(1.0, static_cast<double>(config.turns), config.turns - 1);
  const BrownianPath path =
      config.diffusion > 0.0 && grid.n_steps > 0
          ? sample_brownian(grid, n, derive_seed(seed, 1))
          : BrownianPath{};

  using Ctx = MeetingContext<Scalar>;
  SdeProblem<Scalar, Ctx> problem;
  const double s = config.s, eta = config.smoothing, gain = config.drift_gain;
  problem.base_drift = [=](double, const Vector<Scalar> &, const Ctx &ctx) {
    Vector<Scalar> b(ctx.tau_tilde.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const Scalar &tt = ctx.tau_tilde(i);
      b(i) = -gain * (hinge_slope<Scalar>(tt - s, eta) +
                      hinge_slope<Scalar>(tt - ctx.ts, eta) -
                      hinge_slope<Scalar>(ctx.ts - tt, eta));
    }
    return b;
  };
  if (params != nullptr) {
    const double t_scale = 1.0 / config.turns;
    const double r_scale = config.residual_scale;
    problem.neural_drift = [=](double t, const Vector<Scalar> &x,
                               const Ctx &ctx) {
      Vector<Scalar> mu(x.size());
      Vector<Scalar> in(3);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        in << Scalar(t * t_scale), x(i) - s, ctx.ts - s;
        mu(i) = r_scale * mlp_forward(*params, in)(0);
      }
      return mu;
    };
  }
  problem.fixed_diffusion = [d = config.diffusion](
                                double, const Vector<Scalar> &x, const Ctx &) {
    return Vector<Scalar>(Vector<Scalar>::Constant(x.size(), Scalar(d)));
  };

  auto context_of = [&](const Vector<Scalar> &x) {
    Ctx ctx;
    ctx.tau_tilde = x + eps.cast<Scalar>();
    ctx.ts = actual_start(ctx.tau_tilde, s, config.quorum);
    return ctx;
  };
  auto record = [&](int turn, const Vector<Scalar> &x, const Ctx &ctx) {
    if (history == nullptr) return;
    history->push_back({turn, values_of(x), values_of(ctx.tau_tilde),
                        value_of(ctx.ts)});
  };

  const auto traj = integrate<Scalar, Ctx>(
      problem, tau0.cast<Scalar>(), grid, path,
      [&](int k, double, const Vector<Scalar> &x) {
        Ctx ctx = context_of(x);
        record(k + 1, x, ctx);
        return ctx;
      });
  Ctx last = context_of(traj.back());
  record(config.turns, traj.back(), last);
  return {std::move(last.tau_tilde), last.ts};
}

template MeetingOutcome<double> simulate_meeting(const MeetingConfig &,
                                                 const MlpParams<double> *,
                                                 std::uint64_t,
                                                 MeetingHistory *);
template MeetingOutcome<Var> simulate_meeting(const MeetingConfig &,
                                              const MlpParams<Var> *,
                                              std::uint64_t, MeetingHistory *);

MeetingHistory run_standard(const MeetingConfig &config, std::uint64_t seed) {
  MeetingHistory history;
  simulate_meeting<double>(config, nullptr, seed, &history);
  return history;
}

MeetingGame::MeetingGame(MeetingConfig config, std::vector<double> observations,
                         MlpConfig net_config)
    : config_(config),
      observations_(std::move(observations)),
      net_(mlp_init(net_config)) {
  validate(config_);
  if (observations_.empty()) {
    throw std::invalid_argument("meeting: observations are empty");
  }
  if (net_config.input_dim != 3 || net_config.output_dim != 1) {
    throw std::invalid_argument("meeting: network must map 3 -> 1");
  }
}

LossTerms MeetingGame::play(Tape &, std::span<const MlpParams<Var>> params,
                            const GameIndex &index) const {
  const auto out = simulate_meeting<Var>(config_, &params[0], index.seed);
  Var cost(0.0);
  for (Eigen::Index i = 0; i < out.tau_tilde.size(); ++i) {
    cost += terminal_cost(out.tau_tilde(i), config_.s, out.ts);
  }
  cost /= static_cast<double>(out.tau_tilde.size());
  return {cost, sorted_discrepancy(out.tau_tilde, observations_)};
}

MeetingHistory MeetingGame::simulate(std::uint64_t seed) const {
  MeetingHistory history;
  simulate_meeting<double>(config_, &net_.params(), seed, &history);
  return history;
}

MeetingNeuralResult run_neural(const MeetingConfig &config,
                               const std::vector<double> &observations,
                               const TrainingConfig &training,
                               const MlpConfig &net_config,
                               std::uint64_t eval_seed) {
  MeetingGame game(config, observations, net_config);
  TrainingHistory h = train(game, training);
  return {game.net(), std::move(h), game.simulate(eval_seed)};
}

void write_meeting_csv(const std::filesystem::path &path,
                       const MeetingHistory &history) {
  CsvWriter out(path, {"turn", "agent", "tau", "tau_tilde"});
  for (const auto &snap : history) {
    for (Eigen::Index i = 0; i < snap.tau.size(); ++i) {
      out.cell(snap.turn).cell(static_cast<long long>(i)).cell(snap.tau(i));
      out.cell(snap.tau_tilde(i));
      out.end_row();
    }
  }
}

}  // namespace nmfg
