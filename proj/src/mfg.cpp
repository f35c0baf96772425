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

#include "nmfg/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "nmfg/adabelief.hpp"
#include "nmfg/csv.hpp"

namespace nmfg {

MeanField empirical_mean_field(const PopulationState &pop,
                               const Reducer &reducer) {
  if (pop.size() == 0) {
    throw std::invalid_argument("empirical_mean_field: empty population");
  }
  return reducer(pop);
}

namespace reducers {

MeanField mean_variance(const PopulationState &pop) {
  const Eigen::Index d = pop.agents.cols();
  MeanField out{Eigen::VectorXd(2 * d)};
  const Eigen::RowVectorXd mean = pop.agents.colwise().mean();
  out.summary.head(d) = mean.transpose();
  out.summary.tail(d) =
      (pop.agents.rowwise() - mean).array().square().colwise().mean().transpose();
  return out;
}

MeanField fraction(const PopulationState &pop) {
  const double hits = (pop.agents.col(0).array() != 0.0).cast<double>().sum();
  return MeanField{Eigen::VectorXd::Constant(1, hits / pop.size())};
}

Reducer proportions(int labels) {
  if (labels <= 0) throw std::invalid_argument("proportions: labels <= 0");
  return [labels](const PopulationState &pop) {
    MeanField out{Eigen::VectorXd::Zero(labels)};
    for (Eigen::Index i = 0; i < pop.size(); ++i) {
      const auto label = static_cast<long>(std::lround(pop.agents(i, 0)));
      if (label < 0 || label >= labels) {
        throw std::invalid_argument("proportions: label out of range");
      }
      out.summary(label) += 1.0;
    }
    out.summary /= static_cast<double>(pop.size());
    return out;
  };
}

}  // namespace reducers

void validate(const TrainingConfig &config) {
  if (config.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (config.games_per_epoch <= 0) {
    throw std::invalid_argument("games_per_epoch must be > 0");
  }
  if (config.batch_size < 0) {
    throw std::invalid_argument("batch_size must be >= 0");
  }
  if (!(config.lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (config.data_loss_weight < 0.0) {
    throw std::invalid_argument("data_loss_weight must be >= 0");
  }
  if (!(config.divergence_threshold > 0.0)) {
    throw std::invalid_argument("divergence_threshold must be > 0");
  }
  if (config.threads <= 0) throw std::invalid_argument("threads must be > 0");
}

namespace {

double quarter_mean(const std::vector<EpochRecord> &r, bool first) {
  if (r.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::max<std::size_t>(1, r.size() / 4);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += r[first ? i : r.size() - 1 - i].total;
  }
  return total / static_cast<double>(n);
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct GameOutcome {
  double game_cost = 0.0;
  double data_loss = 0.0;
  double total = 0.0;
  std::vector<Eigen::VectorXd> grads;
};

GameOutcome play_one(const NeuralGame &game, const std::vector<Mlp *> &nets,
                     double weight, const GameIndex &index) {
  Tape tape;
  std::vector<MlpParams<Var>> bound;
  bound.reserve(nets.size());
  for (const Mlp *net : nets) bound.push_back(bind(*net, tape));
  const LossTerms terms = game.play(tape, bound, index);
  const Var total = combined_loss(terms.game_cost, terms.data_loss, weight);
  GameOutcome out;
  out.game_cost = terms.game_cost.value();
  out.data_loss = terms.data_loss.value();
  out.total = total.value();
  if (!std::isfinite(out.total)) return out;
  if (!total.is_constant()) tape.backward(total);
  for (const auto &b : bound) out.grads.push_back(gradient_of(b));
  return out;
}

}  // namespace

double TrainingHistory::first_quartile_mean() const {
  return quarter_mean(records, true);
}

double TrainingHistory::last_quartile_mean() const {
  return quarter_mean(records, false);
}

void TrainingHistory::write_csv(const std::filesystem::path &path) const {
  CsvWriter out(path, {"epoch", "game_cost", "data_loss", "total"});
  for (const auto &r : records) {
    out.cell(r.epoch).cell(r.game_cost).cell(r.data_loss).cell(r.total);
    out.end_row();
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b) {
  return splitmix(splitmix(splitmix(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

TrainingHistory train(NeuralGame &game, const TrainingConfig &config) {
  validate(config);
  std::vector<Mlp *> nets = game.networks();
  AdaBeliefOptions options;
  options.lr = config.lr;
  std::vector<AdaBeliefState> states;
  for (const Mlp *net : nets) {
    states.emplace_back(static_cast<Eigen::Index>(net->parameter_count()),
                        options);
  }
  const int games = config.games_per_epoch;
  const int batch = config.batch_size == 0 ? games
                                           : std::min(config.batch_size, games);
  TrainingHistory history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    for (int start = 0; start < games; start += batch) {
      const int count = std::min(batch, games - start);
      std::vector<GameOutcome> outcomes(static_cast<std::size_t>(count));
      auto run = [&](int g) {
        const GameIndex index{
            epoch, start + g,
            derive_seed(config.seed, static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(start + g))};
        outcomes[static_cast<std::size_t>(g)] =
            play_one(game, nets, config.data_loss_weight, index);
      };
      const int workers = std::min(config.threads, count);
      if (workers <= 1) {
        for (int g = 0; g < count; ++g) run(g);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              for (int g = w; g < count; g += workers) run(g);
            } catch (...) {
              errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
          });
        }
        for (auto &t : pool) t.join();
        for (auto &e : errors) {
          if (e) std::rethrow_exception(e);
        }
      }
      std::vector<Eigen::VectorXd> grads;
      for (const Mlp *net : nets) {
        grads.push_back(Eigen::VectorXd::Zero(
            static_cast<Eigen::Index>(net->parameter_count())));
      }
      for (const auto &o : outcomes) {
        if (!std::isfinite(o.total)) throw TrainingError(epoch, "NaN loss");
        record.game_cost += o.game_cost / games;
        record.data_loss += o.data_loss / games;
        record.total += o.total / games;
        for (std::size_t n = 0; n < nets.size(); ++n) {
          grads[n] += o.grads[n] / static_cast<double>(count);
        }
      }
      for (std::size_t n = 0; n < nets.size(); ++n) {
        if (!grads[n].allFinite()) {
          throw TrainingError(epoch, "non-finite gradient");
        }
        adabelief_step(*nets[n], grads[n], states[n]);
      }
    }
    history.records.push_back(record);
    if (record.total > config.divergence_threshold) {
      throw TrainingError(epoch, "loss diverged");
    }
  }
  return history;
}

double nash_gap(const ProbeGame &game, const PopulationState &pop,
                Eigen::Index probe_agent, std::span<const double> candidates) {
  if (probe_agent < 0 || probe_agent >= pop.size()) {
    throw std::invalid_argument("nash_gap: probe agent out of range");
  }
  if (candidates.empty()) {
    throw std::invalid_argument("nash_gap: no candidate controls");
  }
  const double current =
      game.agent_cost(pop, probe_agent, game.control_of(pop, probe_agent));
  double gap = 0.0;
  for (double c : candidates) {
    gap = std::max(gap, current - game.agent_cost(pop, probe_agent, c));
  }
  return gap;
}

QuadraticTargetGame::QuadraticTargetGame(MlpConfig net_config, double target,
                                         int steps)
    : net_(mlp_init(net_config)), target_(target), grid_(0.0, 1.0, steps) {
  if (net_config.input_dim != 2 || net_config.output_dim != 1) {
    throw std::invalid_argument("QuadraticTargetGame: network must be 2 -> 1");
  }
}

template <typename Scalar>
Scalar QuadraticTargetGame::simulate(const MlpParams<Scalar> &params) const {
  struct NoContext {};
  SdeProblem<Scalar, NoContext> problem;
  problem.base_drift = [](double, const Vector<Scalar> &x, const NoContext &) {
    return Vector<Scalar>(Vector<Scalar>::Zero(x.size()));
  };
  problem.neural_drift = [&params](double t, const Vector<Scalar> &x,
                                   const NoContext &) {
    Vector<Scalar> in(2);
    in << Scalar(t), x(0);
    return mlp_forward(params, in);
  };
  const Vector<Scalar> x0 = Vector<Scalar>::Zero(1);
  const auto traj = integrate<Scalar, NoContext>(
      problem, x0, grid_, BrownianPath{},
      [](int, double, const Vector<Scalar> &) { return NoContext{}; });
  return traj.back()(0);
}

LossTerms QuadraticTargetGame::play(Tape &,
                                    std::span<const MlpParams<Var>> params,
                                    const GameIndex &) const {
  const Var x = simulate(params[0]);
  return {square(x - target_), Var(0.0)};
}

double QuadraticTargetGame::terminal_state() const {
  return simulate(net_.params());
}

}  // namespace nmfg
