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
#ifndef NMFG_SIR_HPP_
#define NMFG_SIR_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nmfg/autodiff.hpp"
#include "nmfg/mfg.hpp"
#include "nmfg/mlp.hpp"
#include "nmfg/sde.hpp"

namespace nmfg {

/// Transition rates per day: transmission, recovery, vaccination.
struct RateVector {
  double gamma = 0.0;
  double rho = 0.0;
  double pi = 0.0;
};

/// Status of the 7 restriction measures: 0 absent, 1 moderate, 2 severe.
using MeasuresVector = std::array<int, 7>;

inline constexpr double kDefaultPopulation = 125.8e6;

/// dS = -g S I - pi S, dI = g S I - rho I, dR = rho I + pi S.
template <typename Scalar>
Vector<Scalar> kolmogorov_drift(const Vector<Scalar> &m, const Scalar &gamma,
                                const Scalar &rho, const Scalar &pi) {
  const Scalar infection = gamma * m(0) * m(1);
  const Scalar vaccination = pi * m(0);
  const Scalar recovery = rho * m(1);
  Vector<Scalar> dm(3);
  dm(0) = -infection - vaccination;
  dm(1) = infection - recovery;
  dm(2) = recovery + vaccination;
  return dm;
}

inline Eigen::Vector3d kolmogorov_drift(const Eigen::Vector3d &m,
                                        const RateVector &r) {
  return kolmogorov_drift<double>(Eigen::VectorXd(m), r.gamma, r.rho, r.pi);
}

/// Output scaling of the networks. An untrained network produces small
/// residuals, so training starts near the warm-started model.
struct SirScales {
  double rate = 0.01;    // rate corrections per unit network output
  double state = 0.002;  // state residuals per unit network output
  double noise = 0.002;  // diffusion per unit network output
};

/// m (3) + base rates (3) + measures / 2 (7). With use_measures false the
/// measure slots are zero, which is the same as removing them.
template <typename Scalar>
Vector<Scalar> sir_features(const Vector<Scalar> &m, const RateVector &rates,
                            const MeasuresVector &v, bool use_measures) {
  Vector<Scalar> in(13);
  in(0) = m(0);
  in(1) = m(1);
  in(2) = m(2);
  in(3) = Scalar(rates.gamma);
  in(4) = Scalar(rates.rho);
  in(5) = Scalar(rates.pi);
  for (int j = 0; j < 7; ++j) {
    in(6 + j) = Scalar(use_measures ? 0.5 * v[static_cast<std::size_t>(j)] : 0.0);
  }
  return in;
}

template <typename Scalar>
struct SirDrift {
  Vector<Scalar> dm;
  Vector<Scalar> rates;  // effective (gamma, rho, pi)
};

/// Drift with learned residuals: effective rates = [base + rate corrections]_+
/// inside the Kolmogorov structure, plus zero-sum state residuals. Network
/// outputs are ordered (d gamma, d rho, d pi, dS, dI, dR).
template <typename Scalar>
SirDrift<Scalar> neural_drift(const Vector<Scalar> &m, const RateVector &rates,
                              const MeasuresVector &v,
                              const MlpParams<Scalar> &params,
                              const SirScales &scales, bool use_measures = true) {
  if (params.weights.front().cols() != 13 || params.weights.back().rows() != 6) {
    throw std::invalid_argument("neural_drift: network must map 13 -> 6");
  }
  const Vector<Scalar> out =
      mlp_forward(params, sir_features<Scalar>(m, rates, v, use_measures));
  SirDrift<Scalar> d;
  d.rates.resize(3);
  d.rates(0) = max0(rates.gamma + scales.rate * out(0));
  d.rates(1) = max0(rates.rho + scales.rate * out(1));
  d.rates(2) = max0(rates.pi + scales.rate * out(2));
  d.dm = kolmogorov_drift<Scalar>(m, d.rates(0), d.rates(1), d.rates(2));
  const Scalar mean = (out(3) + out(4) + out(5)) / 3.0;
  for (int j = 0; j < 3; ++j) d.dm(j) += scales.state * (out(3 + j) - mean);
  return d;
}

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpidemicRow {
  std::string date;  // ISO yyyy-mm-dd
  long long confirmed = 0;
  long long recovered = 0;
  long long deaths = 0;
  long long vaccinations = 0;
  MeasuresVector v{};
  Eigen::Vector3d m = Eigen::Vector3d::Zero();  // (m_S, m_I, m_R)
};

struct EpidemicDataset {
  std::vector<EpidemicRow> rows;
  double population = kDefaultPopulation;

  int days() const { return static_cast<int>(rows.size()); }
  std::vector<Eigen::Vector3d> states() const;
  std::vector<MeasuresVector> measures() const;
};

/// Counts are cumulative: m_I = (confirmed - recovered - deaths) / N,
/// m_R = (recovered + deaths + vaccinations) / N, m_S = 1 - m_I - m_R.
Eigen::Vector3d normalize_counts(const EpidemicRow &row, double population);

/// Parses `date,confirmed,recovered,deaths,vaccinations,v1..v7`. Throws
/// DataError naming the row (1-based, header excluded) and column.
EpidemicDataset ingest_csv(const std::filesystem::path &path,
                           double population = kDefaultPopulation);
void write_epidemic_csv(const std::filesystem::path &path,
                        const EpidemicDataset &data);

/// Clamp negatives to zero and rescale onto the simplex.
Eigen::Vector3d project_simplex(const Eigen::Vector3d &m);

// Per-row N(0, (sigma * range of each component)^2) draws.
std::vector<Eigen::Vector3d> augmentation_noise(const EpidemicDataset &data,
                                                double sigma,
                                                std::uint64_t seed);
// data + augmentation_noise, each row projected back onto the simplex.
EpidemicDataset augment_noise(const EpidemicDataset &data, double sigma,
                              std::uint64_t seed);

struct RateEstimate {
  std::vector<RateVector> rates;  // one per day
  std::vector<bool> converged;
  bool all_converged() const;
};

/// Fits Kolmogorov SIR rates by Nelder-Mead on the centred `window`-day
/// window around every day (shifted inward at the edges), minimizing the MSE
/// between the observed states and a daily Euler integration from the window
/// start.
RateEstimate estimate_rates(const std::vector<Eigen::Vector3d> &states,
                            int window = 28);
RateEstimate estimate_rates(const EpidemicDataset &data, int window = 28);

/// Daily Euler integration of the pure Kolmogorov system.
std::vector<Eigen::Vector3d> integrate_kolmogorov(
    const Eigen::Vector3d &m0, const std::vector<RateVector> &rates, int days);

struct SyntheticSirConfig {
  int days = 120;
  RateVector rates{0.25, 0.1, 0.01};
  Eigen::Vector3d m0{0.99, 0.01, 0.0};
  // Transmission is multiplied by this factor for every severe measure.
  double severe_factor = 0.8;
  bool modulate = true;
  int measure_period = 20;  // days between measure changes
  double death_share = 0.02;
  double population = kDefaultPopulation;
  std::string start_date = "2020-08-01";
};

/// Ground truth from daily Euler steps of the Kolmogorov system. Measures
/// are redrawn every `measure_period` days when `modulate` is set, else
/// stay at zero. `true_rates` (may be null) receives the daily rates.
EpidemicDataset generate_synthetic(const SyntheticSirConfig &config,
                                   std::uint64_t seed,
                                   std::vector<RateVector> *true_rates = nullptr);

struct SirModelConfig {
  MlpConfig drift_net{13, 6, 8, 32, 0};
  MlpConfig diffusion_net{13, 3, 3, 16, 1};
  SirScales scales;
  bool use_measures = true;
  bool learn_drift = true;  // false: Kolmogorov drift with the warm-start rates
  bool learn_diffusion = true;
};

struct SirModel {
  SirModelConfig config;
  Mlp drift;
  Mlp diffusion;
  std::vector<RateVector> base_rates;  // warm start, one per day
};

SirModel make_sir_model(const SirModelConfig &config,
                        std::vector<RateVector> base_rates);

/// Integrates the model for `days` steps from m0. Rates and measures past
/// the end of their series hold their last value. `noise` may be null (no
/// diffusion). Every state is projected back onto the simplex.
template <typename Scalar>
std::vector<Vector<Scalar>> simulate_sir(
    const SirModelConfig &config, const MlpParams<Scalar> *drift,
    const MlpParams<Scalar> *diffusion, const std::vector<RateVector> &rates,
    const std::vector<MeasuresVector> &measures, const Eigen::Vector3d &m0,
    int days, const BrownianPath *noise,
    std::vector<RateVector> *effective = nullptr);

class SirGame : public NeuralGame {
 public:
  // Every path starts at m0; targets[j] is one (noisy) copy of the data.
  SirGame(SirModel &model, Eigen::Vector3d m0,
          std::vector<std::vector<Eigen::Vector3d>> targets,
          std::vector<MeasuresVector> measures);

  std::vector<Mlp *> networks() override;
  LossTerms play(Tape &tape, std::span<const MlpParams<Var>> params,
                 const GameIndex &index) const override;

 private:
  SirModel &model_;
  Eigen::Vector3d m0_;
  std::vector<std::vector<Eigen::Vector3d>> targets_;
  std::vector<MeasuresVector> measures_;
};

struct SirTrainConfig {
  int epochs = 200;
  int trajectories = 100;
  double noise_sigma = 0.05;
  int window = 28;
  TrainingConfig training;  // epochs/games are taken from the fields above
};

struct SirTrainResult {
  SirModel model;
  TrainingHistory history;
  RateEstimate warm_start;
};

/// Warm start by estimate_rates(), then training on noise-augmented copies
/// of the dataset with one optimizer step per trajectory.
SirTrainResult train_sir(const EpidemicDataset &data,
                         const SirModelConfig &model_config,
                         const SirTrainConfig &config);

/// Deterministic daily integration of the trained drift.
std::vector<Eigen::Vector3d> forecast(const SirModel &model,
                                      const Eigen::Vector3d &initial, int days,
                                      const std::vector<MeasuresVector> &v_series,
                                      std::vector<RateVector> *effective = nullptr);

/// Mean over `paths` noisy model paths of the per-entry squared error
/// against `truth` (days 1..end).
double trajectory_mse(const SirModel &model,
                      const std::vector<Eigen::Vector3d> &truth,
                      const std::vector<MeasuresVector> &measures, int paths,
                      std::uint64_t seed);

/// ISO date arithmetic.
std::string add_days(const std::string &iso_date, int days);

}  // namespace nmfg

#endif  // NMFG_SIR_HPP_
