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


#include "nmfg/dice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "nmfg/adabelief.hpp"
#include "nmfg/autodiff.hpp"
#include "nmfg/csv.hpp"
#include "nmfg/mfg.hpp"

namespace nmfg {

namespace {

bool on_simplex(const Eigen::VectorXd &p) {
  return (p.array() >= 0.0).all() && std::abs(p.sum() - 1.0) < 1e-9;
}

int own_count(int face, const std::vector<int> &own) {
  return static_cast<int>(std::count(own.begin(), own.end(), face));
}

Eigen::VectorXd clamp_renormalize(const Eigen::VectorXd &p) {
  Eigen::VectorXd q = p.cwiseMax(0.0);
  const double total = q.sum();
  if (!(total > 0.0)) {
    return Eigen::VectorXd::Constant(p.size(), 1.0 / static_cast<double>(p.size()));
  }
  return q / total;
}

struct BidCost {
  double safety = 0.0;    // j1
  double bluffing = 0.0;  // j2
  double niceness = 0.0;  // j3
};

std::vector<BidCost> bid_costs(const RoundOutcome &outcome,
                               const DiceConfig &config) {
  std::vector<BidCost> out;
  const double mq = config.total_dice();
  const double mf = config.faces;
  int previous = 0;
  for (const Turn &turn : outcome.turns) {
    if (turn.challenge) break;
    const double q = turn.bid.quantity;
    const double a = count_face(outcome.dice, turn.bid.face);
    out.push_back({max0(mq - (q - previous)), max0(a - q),
                   max0(mf - turn.bid.face)});
    previous = turn.bid.quantity;
  }
  return out;
}

double mean_std(const std::vector<double> &xs, double *std_out) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  *std_out = std::sqrt(var / static_cast<double>(xs.size()));
  return mean;
}

}  // namespace

Eigen::VectorXd DiceConfig::true_odds() const {
  if (theta.size() == 0) {
    return Eigen::VectorXd::Constant(faces, 1.0 / static_cast<double>(faces));
  }
  return theta;
}

Eigen::VectorXd DiceConfig::initial_beliefs() const {
  if (theta_hat0.size() == 0) {
    return Eigen::VectorXd::Constant(faces, 1.0 / static_cast<double>(faces));
  }
  return theta_hat0;
}

void validate(const DiceConfig &c) {
  if (c.players < 2) throw std::invalid_argument("dice: players must be >= 2");
  if (c.dice < 1) throw std::invalid_argument("dice: dice must be >= 1");
  if (c.faces < 2) throw std::invalid_argument("dice: faces must be >= 2");
  if (c.theta.size() != 0 &&
      (c.theta.size() != c.faces || !on_simplex(c.theta))) {
    throw std::invalid_argument("dice: theta must be a distribution over faces");
  }
  if (c.theta_hat0.size() != 0 &&
      (c.theta_hat0.size() != c.faces || !on_simplex(c.theta_hat0))) {
    throw std::invalid_argument(
        "dice: theta_hat0 must be a distribution over faces");
  }
  if (!(c.likelihood > 0.0 && c.likelihood < 1.0)) {
    throw std::invalid_argument("dice: likelihood threshold outside (0, 1)");
  }
  if (!(c.lambda0 >= 0.0)) throw std::invalid_argument("dice: lambda0 < 0");
  if (c.rounds < 1) throw std::invalid_argument("dice: rounds must be >= 1");
  if (!(c.prior_weight > 0.0)) {
    throw std::invalid_argument("dice: prior_weight must be > 0");
  }
  if (c.belief_scale < 0.0 || c.bluff_scale < 0.0 || c.challenge_weight < 0.0) {
    throw std::invalid_argument("dice: scales and weights must be >= 0");
  }
  if (!(c.lr > 0.0)) throw std::invalid_argument("dice: lr must be > 0");
}

bool legal_successor(const Bid &previous, const Bid &next) {
  if (next.face == previous.face) return next.quantity > previous.quantity;
  if (next.face > previous.face) return next.quantity >= previous.quantity;
  return false;
}

double estimate_occurrences(int face, const std::vector<int> &own,
                            const Eigen::VectorXd &theta_hat, int others) {
  if (face < 1 || face > theta_hat.size()) {
    throw std::invalid_argument("estimate_occurrences: face out of range");
  }
  if (others < 0) throw std::invalid_argument("estimate_occurrences: others < 0");
  return own_count(face, own) + others * theta_hat(face - 1);
}

double bid_probability(int face, int quantity, const std::vector<int> &own,
                       const Eigen::VectorXd &theta_hat, int others) {
  if (face < 1 || face > theta_hat.size()) {
    throw std::invalid_argument("bid_probability: face out of range");
  }
  if (quantity < 0) throw std::invalid_argument("bid_probability: quantity < 0");
  const int need = quantity - own_count(face, own);
  if (need <= 0) return 1.0;
  if (need > others) return 0.0;
  const double p = theta_hat(face - 1);
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double n = others;
  double total = 0.0;
  for (int k = need; k <= others; ++k) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                           std::lgamma(n - k + 1.0) + k * std::log(p) +
                           (n - k) * std::log1p(-p);
    total += std::exp(log_pmf);
  }
  return std::min(1.0, total);
}

TurnDecision player_turn(const PlayerState &state, const Bid &previous,
                         const DiceConfig &config, std::mt19937_64 &rng) {
  const int others = (config.players - 1) * config.dice;
  TurnDecision d;
  const double e =
      estimate_occurrences(previous.face, state.dice, state.theta_hat, others);
  int face = previous.face;
  if (previous.quantity > e) {
    face = previous.face + 1;
    if (face > config.faces) {
      d.challenge = true;
      return d;
    }
  }
  if (bid_probability(face, previous.quantity, state.dice, state.theta_hat,
                      others) < config.likelihood) {
    d.challenge = true;
    return d;
  }
  if (state.lambda > 0.0) {
    std::poisson_distribution<int> poisson(state.lambda);
    d.bluff = poisson(rng);
  }
  int quantity = previous.quantity + d.bluff;
  if (face == previous.face) quantity = std::max(quantity, previous.quantity + 1);
  d.bid = {face, quantity};
  return d;
}

Bid opening_bid(const PlayerState &state, const DiceConfig &config) {
  const int others = (config.players - 1) * config.dice;
  const double e = estimate_occurrences(1, state.dice, state.theta_hat, others);
  return {1, std::max(1, static_cast<int>(std::lround(e)))};
}

void deal(std::vector<PlayerState> &players, const DiceConfig &config,
          std::mt19937_64 &rng) {
  const Eigen::VectorXd theta = config.true_odds();
  std::discrete_distribution<int> face(theta.data(), theta.data() + theta.size());
  for (auto &p : players) {
    p.dice.resize(static_cast<std::size_t>(config.dice));
    for (auto &d : p.dice) d = face(rng) + 1;
  }
}

int count_face(const std::vector<std::vector<int>> &dice, int face) {
  int n = 0;
  for (const auto &hand : dice) n += own_count(face, hand);
  return n;
}

RoundOutcome play_round(const std::vector<PlayerState> &players,
                        const DiceConfig &config, std::mt19937_64 &rng,
                        const TurnPolicy &policy) {
  const int m = static_cast<int>(players.size());
  if (m < 2) throw std::invalid_argument("play_round: need >= 2 players");
  const auto effective = [&](int p, const Bid &previous) {
    const auto &s = players[static_cast<std::size_t>(p)];
    return policy ? policy(p, previous, s) : s;
  };
  RoundOutcome out;
  for (const auto &p : players) out.dice.push_back(p.dice);
  const Bid none{1, 0};
  out.turns.push_back({0, false, opening_bid(effective(0, none), config), 0});
  // Each bid strictly climbs the (face, quantity) ladder and quantities
  // beyond the dice count are always challenged, so this bound is never hit.
  const int max_turns = config.faces * (config.total_dice() + 2) + 2;
  for (int t = 1;; ++t) {
    if (t > max_turns) throw std::logic_error("play_round: no termination");
    const int p = t % m;
    const Bid previous = out.turns.back().bid;
    const TurnDecision d = player_turn(effective(p, previous), previous, config, rng);
    if (d.challenge) {
      out.turns.push_back({p, true, previous, 0});
      out.challenger = p;
      out.last_bidder = out.turns[out.turns.size() - 2].player;
      out.actual = count_face(out.dice, previous.face);
      out.challenge_correct = out.actual < previous.quantity;
      out.winner = out.challenge_correct ? out.challenger : out.last_bidder;
      return out;
    }
    out.turns.push_back({p, false, d.bid, d.bluff});
  }
}

std::vector<double> round_cost(const RoundOutcome &outcome,
                               const DiceConfig &config) {
  std::vector<double> out;
  for (const auto &c : bid_costs(outcome, config)) {
    out.push_back(c.safety + c.bluffing + c.niceness);
  }
  return out;
}

double kl_divergence(const Eigen::VectorXd &p, const Eigen::VectorXd &q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl: size mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) kl += p(i) * std::log(p(i) / std::max(q(i), 1e-12));
  }
  return kl;
}

MlpConfig dice_net_config(const DiceConfig &config, std::uint64_t seed) {
  return {2 * config.faces + 2, config.faces + 1, config.hidden_layers,
          config.hidden_width, seed};
}

DiceTrainResult train_dice(const DiceConfig &config, std::uint64_t seed) {
  validate(config);
  const int k_faces = config.faces;
  const int total = config.total_dice();
  const Eigen::VectorXd theta = config.true_odds();
  std::mt19937_64 rng(derive_seed(seed, 11));
  std::vector<PlayerState> players(static_cast<std::size_t>(config.players));
  for (auto &p : players) {
    p.theta_hat = config.initial_beliefs();
    p.lambda = config.lambda0;
  }
  Mlp net = mlp_init(dice_net_config(config, derive_seed(seed, 12)));
  AdaBeliefOptions options;
  options.lr = config.lr;
  AdaBeliefState optimizer(static_cast<Eigen::Index>(net.parameter_count()),
                           options);

  DiceHistory history;
  history.lambda0 = config.lambda0;
  history.neural = config.neural;
  double seen = 0.0;
  double challenge_baseline = 0.0;

  struct Evaluation {
    int player = 0;
    Vector<Var> belief;
    Var rate;
    Eigen::VectorXd belief_residual;
    double rate_residual = 0.0;
  };

  for (int r = 0; r < config.rounds; ++r) {
    deal(players, config, rng);
    Tape tape;
    MlpParams<Var> params;
    if (config.neural) params = bind(net, tape);
    std::vector<Evaluation> evals;
    const TurnPolicy policy = [&](int p, const Bid &previous,
                                  const PlayerState &s) {
      if (!config.neural) return s;
      Eigen::VectorXd x(2 * k_faces + 2);
      x.head(k_faces) = s.theta_hat;
      for (int f = 1; f <= k_faces; ++f) {
        x(k_faces + f - 1) =
            own_count(f, s.dice) / static_cast<double>(config.dice);
      }
      x(2 * k_faces) = previous.face / static_cast<double>(k_faces);
      x(2 * k_faces + 1) = previous.quantity / static_cast<double>(total);
      const Vector<Var> out = mlp_forward(params, Vector<Var>(x.cast<Var>()));
      Evaluation e;
      e.player = p;
      Var mean(0.0);
      for (int f = 0; f < k_faces; ++f) mean += out(f);
      mean = mean / static_cast<double>(k_faces);
      e.belief.resize(k_faces);
      e.belief_residual.resize(k_faces);
      Var sum(0.0);
      for (int f = 0; f < k_faces; ++f) {
        const Var shift = config.belief_scale * (out(f) - mean);
        e.belief_residual(f) = shift.value();
        e.belief(f) = clamp_straight_through(s.theta_hat(f) + shift, 0.0, 1.0);
        sum += e.belief(f);
      }
      for (int f = 0; f < k_faces; ++f) e.belief(f) = e.belief(f) / sum;
      const Var shift = config.bluff_scale * out(k_faces);
      e.rate_residual = shift.value();
      e.rate = clamp_straight_through(s.lambda + shift, 0.0,
                                      std::numeric_limits<double>::infinity());
      PlayerState eff = s;
      eff.theta_hat = values_of(e.belief);
      eff.lambda = e.rate.value();
      evals.push_back(std::move(e));
      return eff;
    };
    const RoundOutcome outcome = play_round(players, config, rng, policy);

    Eigen::VectorXd revealed(k_faces);
    for (int f = 1; f <= k_faces; ++f) {
      revealed(f - 1) = count_face(outcome.dice, f) / static_cast<double>(total);
    }
    const auto costs = bid_costs(outcome, config);
    double game_cost = 0.0;
    for (const auto &c : costs) game_cost += c.safety + c.bluffing + c.niceness;
    game_cost /= static_cast<double>(costs.size());
    const double challenged = outcome.challenge_correct ? 1.0 : 0.0;
    if (r == 0) challenge_baseline = challenged;

    DiceRoundRecord rec;
    if (config.neural) {
      Var belief_loss(0.0);
      for (const auto &e : evals) {
        for (int f = 0; f < k_faces; ++f) {
          belief_loss += square(e.belief(f) - revealed(f));
        }
      }
      belief_loss = belief_loss / static_cast<double>(evals.size() * k_faces);
      // Bid costs see the bluff through its mean (the quantity without the
      // draw plus the effective rate); the challenge outcome reaches the
      // rate through a score-function surrogate of the Poisson draws.
      Var cost(0.0);
      Var surrogate(0.0);
      const double mq = total;
      int previous = outcome.turns.front().bid.quantity;
      cost += costs.front().safety + costs.front().bluffing +
              costs.front().niceness;
      int draws = 0;
      for (std::size_t t = 1; t + 1 < outcome.turns.size(); ++t) {
        const Turn &turn = outcome.turns[t];
        const Var &rate = evals[t].rate;
        const Var q = (turn.bid.quantity - turn.bluff) + rate;
        const double a = count_face(outcome.dice, turn.bid.face);
        cost += max0(mq - (q - previous)) + max0(a - q) +
                costs[t].niceness;
        previous = turn.bid.quantity;
        Var log_p = -rate;
        if (turn.bluff > 0) {
          log_p = turn.bluff * log(rate) - rate - std::lgamma(turn.bluff + 1.0);
        }
        surrogate += log_p;
        ++draws;
      }
      cost = cost / static_cast<double>(costs.size());
      Var loss = belief_loss + cost;
      if (draws > 0) {
        loss += config.challenge_weight * (challenged - challenge_baseline) *
                surrogate / static_cast<double>(draws);
      }
      tape.backward(loss);
      adabelief_step(net, gradient_of(params), optimizer);
      rec.belief_loss = belief_loss.value();
    }
    challenge_baseline = 0.9 * challenge_baseline + 0.1 * challenged;

    // One step of the belief and bluff dynamics per round. The belief step
    // shrinks with the evidence gathered so far.
    const double step = total / (config.prior_weight + seen + total);
    seen += total;
    for (int p = 0; p < config.players; ++p) {
      auto &s = players[static_cast<std::size_t>(p)];
      Eigen::VectorXd belief_res = Eigen::VectorXd::Zero(k_faces);
      double rate_res = 0.0;
      int n = 0;
      for (const auto &e : evals) {
        if (e.player != p) continue;
        belief_res += e.belief_residual;
        rate_res += e.rate_residual;
        ++n;
      }
      if (n > 0) {
        belief_res /= n;
        rate_res /= n;
      }
      s.theta_hat =
          clamp_renormalize(s.theta_hat + step * (revealed - s.theta_hat + belief_res));
      s.lambda = max0(s.lambda + rate_res);
    }

    rec.round = r;
    rec.length = outcome.bids();
    rec.challenge_correct = outcome.challenge_correct;
    rec.dice_seen = static_cast<long long>(seen);
    rec.game_cost = game_cost;
    for (const auto &s : players) {
      rec.mean_lambda += s.lambda;
      rec.mean_kl += kl_divergence(theta, s.theta_hat);
    }
    rec.mean_lambda /= config.players;
    rec.mean_kl /= config.players;
    history.rounds.push_back(rec);
    for (std::size_t t = 0; t < outcome.turns.size(); ++t) {
      const Turn &turn = outcome.turns[t];
      history.turns.push_back(
          {r, turn.player, static_cast<int>(t), turn.bid,
           turn.challenge ? "challenge" : (t == 0 ? "open" : "bid")});
    }
  }
  history.final_players = players;
  return {std::move(net), std::move(history)};
}

std::vector<AnalysisRow> analyze(const std::vector<DiceHistory> &histories) {
  if (histories.empty()) throw std::invalid_argument("analyze: no histories");
  std::map<std::pair<int, double>, std::vector<const DiceHistory *>> groups;
  for (const auto &h : histories) {
    if (h.rounds.empty()) throw std::invalid_argument("analyze: empty history");
    groups[{h.neural ? 0 : 1, h.lambda0}].push_back(&h);
  }
  std::vector<AnalysisRow> rows;
  const auto add = [&](const std::string &metric, const std::string &mode,
                       double x, const std::vector<double> &xs) {
    AnalysisRow row{metric, mode, x, 0.0, 0.0, static_cast<int>(xs.size())};
    row.mean = mean_std(xs, &row.std);
    rows.push_back(row);
  };
  for (const auto &[key, hs] : groups) {
    const std::string mode = key.first == 0 ? "neural" : "mfg";
    std::vector<double> length, lambda, correct;
    for (const auto *h : hs) {
      for (const auto &r : h->rounds) {
        length.push_back(r.length);
        lambda.push_back(r.mean_lambda);
        correct.push_back(r.challenge_correct ? 1.0 : 0.0);
      }
    }
    add("game_length", mode, key.second, length);
    add("learned_lambda", mode, key.second, lambda);
    add("challenge_ratio", mode, key.second, correct);
  }
  std::map<std::pair<int, long long>, std::vector<double>> kl;
  for (const auto &h : histories) {
    for (const auto &r : h.rounds) {
      kl[{h.neural ? 0 : 1, r.dice_seen}].push_back(r.mean_kl);
    }
  }
  for (const auto &[key, xs] : kl) {
    add("kl", key.first == 0 ? "neural" : "mfg", static_cast<double>(key.second),
        xs);
  }
  return rows;
}

void write_analysis_csv(const std::filesystem::path &path,
                        const std::vector<AnalysisRow> &rows) {
  CsvWriter out(path, {"metric", "mode", "x", "mean", "std", "count"});
  for (const auto &r : rows) {
    out.cell(r.metric).cell(r.mode).cell(r.x).cell(r.mean).cell(r.std).cell(r.count);
    out.end_row();
  }
}

void write_dice_history_csv(const std::filesystem::path &path,
                            const DiceHistory &history) {
  CsvWriter out(path, {"round", "player", "turn", "face", "quantity", "action"});
  for (const auto &t : history.turns) {
    out.cell(t.round).cell(t.player).cell(t.turn).cell(t.bid.face);
    out.cell(t.bid.quantity).cell(t.action);
    out.end_row();
  }
}

}  // namespace nmfg
