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


#ifndef NMFG_DICE_HPP_
#define NMFG_DICE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nmfg/mlp.hpp"

namespace nmfg {

struct DiceConfig {
  int players = 2;
  int dice = 2;  // per player
  int faces = 6;
  Eigen::VectorXd theta;       // true face odds; empty means fair
  Eigen::VectorXd theta_hat0;  // initial beliefs; empty means uniform
  double likelihood = 0.3;     // challenge threshold l
  double lambda0 = 0.0;        // initial bluff rate
  bool neural = true;          // false: pure MFG dynamics
  int rounds = 1000;
  // Pseudo-dice behind the initial belief in the belief drift.
  double prior_weight = 6.0;
  double belief_scale = 0.01;  // belief residual per unit network output
  double bluff_scale = 0.1;    // bluff-rate residual per unit network output
  double challenge_weight = 1.0;
  double lr = 5e-4;
  int hidden_layers = 3;
  int hidden_width = 16;

  int total_dice() const { return players * dice; }
  Eigen::VectorXd true_odds() const;
  Eigen::VectorXd initial_beliefs() const;
};

/// Throws std::invalid_argument on a config that breaks its invariants.
void validate(const DiceConfig &config);

struct Bid {
  int face = 1;  // 1..faces
  int quantity = 0;

  bool operator==(const Bid &) const = default;
};

/// Higher quantity with the same or a higher face, or the same quantity with
/// a higher face.
bool legal_successor(const Bid &previous, const Bid &next);

struct PlayerState {
  Eigen::VectorXd theta_hat;
  double lambda = 0.0;
  std::vector<int> dice;  // own faces, 1..faces
};

/// Own count of `face` plus others * theta_hat[face].
double estimate_occurrences(int face, const std::vector<int> &own,
                            const Eigen::VectorXd &theta_hat, int others);

/// P[own count + Binomial(others, theta_hat[face]) >= quantity].
double bid_probability(int face, int quantity, const std::vector<int> &own,
                       const Eigen::VectorXd &theta_hat, int others);

struct TurnDecision {
  bool challenge = false;
  Bid bid;
  int bluff = 0;  // Poisson draw added to the quantity
};

/// One player's move given the previous bid (the player's algorithm):
/// move to the next face when the previous quantity exceeds the estimate
/// (challenging past the top face), challenge when the held bid is less
/// likely than the threshold, otherwise add a Poisson(lambda) bluff. The
/// result is raised to the smallest legal successor when needed.
TurnDecision player_turn(const PlayerState &state, const Bid &previous,
                         const DiceConfig &config, std::mt19937_64 &rng);

/// Face 1 at the rounded estimate of its occurrences (at least 1).
Bid opening_bid(const PlayerState &state, const DiceConfig &config);

struct Turn {
  int player = 0;
  bool challenge = false;
  Bid bid;
  int bluff = 0;
};

struct RoundOutcome {
  std::vector<Turn> turns;  // opening bid first, challenge last
  int challenger = 0;
  int last_bidder = 0;
  int winner = 0;
  bool challenge_correct = false;
  int actual = 0;  // occurrences of the challenged face among all dice
  std::vector<std::vector<int>> dice;

  int bids() const { return static_cast<int>(turns.size()) - 1; }
};

/// Rolls every player's dice from theta into `players`.
void deal(std::vector<PlayerState> &players, const DiceConfig &config,
          std::mt19937_64 &rng);

/// Effective state used for one turn; lets a network adjust beliefs and the
/// bluff rate. Receives the acting player, the previous bid and the state.
using TurnPolicy =
    std::function<PlayerState(int, const Bid &, const PlayerState &)>;

/// Plays one round on already dealt players. Player 0 opens, then turns
/// rotate until a challenge.
RoundOutcome play_round(const std::vector<PlayerState> &players,
                        const DiceConfig &config, std::mt19937_64 &rng,
                        const TurnPolicy &policy = {});

int count_face(const std::vector<std::vector<int>> &dice, int face);

/// j1 + j2 + j3 for every bid of the round (opening bid first), with
/// m_q the total number of dice and m_f the number of faces.
std::vector<double> round_cost(const RoundOutcome &outcome,
                               const DiceConfig &config);

/// KL(p || q), with 0 log 0 = 0 and q floored at 1e-12.
double kl_divergence(const Eigen::VectorXd &p, const Eigen::VectorXd &q);

struct DiceRoundRecord {
  int round = 0;
  int length = 0;  // bids in the round
  bool challenge_correct = false;
  double mean_lambda = 0.0;  // after the round's update
  double mean_kl = 0.0;      // KL(theta || theta_hat) after the update
  long long dice_seen = 0;   // revealed dice per player so far
  double game_cost = 0.0;    // mean normalized j per bid
  double belief_loss = 0.0;
};

struct DiceTurnRow {
  int round = 0;
  int player = 0;
  int turn = 0;
  Bid bid;
  std::string action;  // open, bid or challenge
};

struct DiceHistory {
  double lambda0 = 0.0;
  bool neural = true;
  std::vector<DiceRoundRecord> rounds;
  std::vector<DiceTurnRow> turns;
  std::vector<PlayerState> final_players;
};

struct DiceTrainResult {
  Mlp net;
  DiceHistory history;
};

MlpConfig dice_net_config(const DiceConfig &config, std::uint64_t seed);

/// Plays config.rounds rounds. After each round the beliefs move toward the
/// revealed face frequencies and, in neural mode, a shared network adds
/// belief and bluff residuals and is updated from the round's loss.
DiceTrainResult train_dice(const DiceConfig &config, std::uint64_t seed);

struct AnalysisRow {
  std::string metric;  // game_length, learned_lambda, challenge_ratio, kl
  std::string mode;    // neural or mfg
  double x = 0.0;      // lambda0, or dice seen for kl
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

/// Per mode and lambda0: game length, learned bluff rate and challenge
/// success ratio over all rounds; per dice-seen count: KL across
/// histories. Throws std::invalid_argument on empty input.
std::vector<AnalysisRow> analyze(const std::vector<DiceHistory> &histories);

void write_analysis_csv(const std::filesystem::path &path,
                        const std::vector<AnalysisRow> &rows);
void write_dice_history_csv(const std::filesystem::path &path,
                            const DiceHistory &history);

}  // namespace nmfg

#endif  // NMFG_DICE_HPP_
