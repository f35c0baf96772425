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
#ifndef NMFG_MEETING_HPP_
#define NMFG_MEETING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "nmfg/autodiff.hpp"
#include "nmfg/mfg.hpp"
#include "nmfg/mlp.hpp"

namespace nmfg {

struct MeetingConfig {
  double s = 15.0;       // scheduled start (hours)
  double quorum = 0.9;   // fraction that must be present to start
  int agents = 200;
  double noise_std = 1.0;  // std of the arrival offset
  int turns = 15;
  double init_mean = 12.0;
  double init_std = 1.0;
  double drift_gain = 0.5;  // step size of the best-response drift
  double smoothing = 1.0;   // width of the smoothed hinge slopes
  double diffusion = 0.1;   // Brownian noise on tau per turn
  double residual_scale = 1.0;  // multiplies the network output
};

void validate(const MeetingConfig &config);

/// max(s, ceil(quorum N)-th smallest arrival).
template <typename Scalar>
Scalar actual_start(const Vector<Scalar> &tau_tilde, double s, double quorum) {
  const Eigen::Index n = tau_tilde.size();
  if (n == 0) throw std::invalid_argument("actual_start: no agents");
  if (!(quorum > 0.0 && quorum <= 1.0)) {
    throw std::invalid_argument("actual_start: quorum outside (0, 1]");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto k = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::ceil(quorum * static_cast<double>(n) - 1e-9)),
      1, n);
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return value_of(tau_tilde(a)) < value_of(tau_tilde(b));
                   });
  const Scalar &kth = tau_tilde(order[static_cast<std::size_t>(k - 1)]);
  return select(value_of(kth) > s, kth, Scalar(s));
}

/// Reputation [tau~ - s]_+ + inconvenience [tau~ - ts~]_+ + waiting
/// [ts~ - tau~]_+.
template <typename Scalar>
Scalar terminal_cost(const Scalar &tau_tilde, double s, const Scalar &ts) {
  if (value_of(ts) < s) throw std::invalid_argument("terminal_cost: ts~ < s");
  return max0(tau_tilde - s) + max0(tau_tilde - ts) + max0(ts - tau_tilde);
}

/// Pooled samples of `groups` Gaussians with mean ~ N(center, center_std)
/// and std ~ Gamma(shape, scale), `per_group` draws each.
struct MixtureRecipe {
  double center = 15.0;
  double center_std = 0.5;
  double gamma_shape = 2.0;
  double gamma_scale = 0.2;
};

std::vector<double> generate_observations(int groups, int per_group,
                                          std::uint64_t seed,
                                          const MixtureRecipe &recipe = {});

/// Mean squared gap between sorted predictions and the matching quantiles
/// of the observations.
template <typename Scalar>
Scalar sorted_discrepancy(const Vector<Scalar> &predicted,
                          std::vector<double> observed) {
  if (predicted.size() == 0 || observed.empty()) {
    throw std::invalid_argument("sorted_discrepancy: empty input");
  }
  std::sort(observed.begin(), observed.end());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(predicted.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return value_of(predicted(a)) < value_of(predicted(b));
  });
  const auto n = static_cast<double>(predicted.size());
  const auto m = observed.size();
  Scalar total(0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto j = std::min(
        m - 1, static_cast<std::size_t>((static_cast<double>(i) + 0.5) / n *
                                        static_cast<double>(m)));
    total += square(predicted(order[i]) - observed[j]);
  }
  return total / n;
}

struct MeetingSnapshot {
  int turn = 0;
  Eigen::VectorXd tau;
  Eigen::VectorXd tau_tilde;
  double ts = 0.0;
};

using MeetingHistory = std::vector<MeetingSnapshot>;

/// Network shape used for the residual drift: inputs (t, tau, ts~).
MlpConfig meeting_net_config(std::uint64_t seed);

/// One game. Initial tau ~ N(init_mean, init_std), one arrival offset per
/// agent and game, best-response drift plus optional network residual.
/// Returns the terminal actual arrivals and actual start; `history` (may be
/// null) receives one snapshot per turn.
template <typename Scalar>
struct MeetingOutcome {
  Vector<Scalar> tau_tilde;
  Scalar ts;
};

template <typename Scalar>
MeetingOutcome<Scalar> simulate_meeting(const MeetingConfig &config,
                                        const MlpParams<Scalar> *params,
                                        std::uint64_t seed,
                                        MeetingHistory *history = nullptr);

MeetingHistory run_standard(const MeetingConfig &config, std::uint64_t seed);

/// Game with a shared residual network trained on observed arrivals.
class MeetingGame : public NeuralGame {
 public:
  MeetingGame(MeetingConfig config, std::vector<double> observations,
              MlpConfig net_config);

  std::vector<Mlp *> networks() override { return {&net_}; }
  LossTerms play(Tape &tape, std::span<const MlpParams<Var>> params,
                 const GameIndex &index) const override;

  const Mlp &net() const { return net_; }
  MeetingHistory simulate(std::uint64_t seed) const;

 private:
  MeetingConfig config_;
  std::vector<double> observations_;
  Mlp net_;
};

struct MeetingNeuralResult {
  Mlp net;
  TrainingHistory training;
  MeetingHistory history;
};

MeetingNeuralResult run_neural(const MeetingConfig &config,
                               const std::vector<double> &observations,
                               const TrainingConfig &training,
                               const MlpConfig &net_config,
                               std::uint64_t eval_seed);

/// `turn,agent,tau,tau_tilde`.
void write_meeting_csv(const std::filesystem::path &path,
                       const MeetingHistory &history);

}  // namespace nmfg

#endif  // NMFG_MEETING_HPP_
