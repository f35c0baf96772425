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
#include "nmfg/sir.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "nmfg/csv.hpp"
#include "nmfg/nelder_mead.hpp"

namespace nmfg {

namespace {

const std::vector<std::string> kSchema = {
    "date", "confirmed", "recovered", "deaths", "vaccinations", "v1",
    "v2",   "v3",        "v4",        "v5",     "v6",           "v7"};

std::chrono::sys_days parse_date(const std::string &text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (text.size() != 10 ||
      std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw std::invalid_argument("not an ISO date: '" + text + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw std::invalid_argument("invalid date: '" + text + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buffer;
}

long long parse_count(const std::string &text) {
  std::size_t used = 0;
  const long long v = std::stoll(text, &used);
  if (used != text.size() || v < 0) throw std::invalid_argument(text);
  return v;
}

}  // namespace

std::string add_days(const std::string &iso_date, int days) {
  return format_date(parse_date(iso_date) + std::chrono::days{days});
}

std::vector<Eigen::Vector3d> EpidemicDataset::states() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(rows.size());
  for (const auto &r : rows) out.push_back(r.m);
  return out;
}

std::vector<MeasuresVector> EpidemicDataset::measures() const {
  std::vector<MeasuresVector> out;
  out.reserve(rows.size());
  for (const auto &r : rows) out.push_back(r.v);
  return out;
}

Eigen::Vector3d normalize_counts(const EpidemicRow &row, double population) {
  Eigen::Vector3d m;
  m(1) = static_cast<double>(row.confirmed - row.recovered - row.deaths) /
         population;
  m(2) = static_cast<double>(row.recovered + row.deaths + row.vaccinations) /
         population;
  m(0) = 1.0 - m(1) - m(2);
  return m;
}

EpidemicDataset ingest_csv(const std::filesystem::path &path,
                           double population) {
  if (!(population > 0.0)) throw DataError("population must be > 0");
  CsvTable table;
  try {
    table = read_csv(path);
  } catch (const std::exception &e) {
    throw DataError(e.what());
  }
  if (table.header.empty()) throw DataError(path.string() + ": empty file");
  if (table.header != kSchema) {
    throw DataError(path.string() + ": header must be " +
                    "date,confirmed,recovered,deaths,vaccinations,v1..v7");
  }
  if (table.rows.empty()) throw DataError(path.string() + ": no data rows");
  EpidemicDataset data;
  data.population = population;
  std::chrono::sys_days previous{};
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto &cells = table.rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    if (cells.size() != kSchema.size()) {
      throw DataError(where + ": expected " + std::to_string(kSchema.size()) +
                      " columns, found " + std::to_string(cells.size()));
    }
    EpidemicRow row;
    std::size_t col = 0;
    try {
      const auto day = parse_date(cells[0]);
      if (r > 0 && day != previous + std::chrono::days{1}) {
        throw DataError(where + ", column date: dates must be consecutive days");
      }
      previous = day;
      row.date = cells[0];
      col = 1;
      row.confirmed = parse_count(cells[1]);
      col = 2;
      row.recovered = parse_count(cells[2]);
      col = 3;
      row.deaths = parse_count(cells[3]);
      col = 4;
      row.vaccinations = parse_count(cells[4]);
      for (col = 5; col < 12; ++col) {
        const long long v = std::stoll(cells[col]);
        if (v < 0 || v > 2 || cells[col].size() != 1) {
          throw std::invalid_argument("measure outside {0, 1, 2}");
        }
        row.v[col - 5] = static_cast<int>(v);
      }
    } catch (const DataError &) {
      throw;
    } catch (const std::exception &) {
      throw DataError(where + ", column " + kSchema[col] + ": invalid value '" +
                      cells[col] + "'");
    }
    row.m = normalize_counts(row, population);
    if (row.m.minCoeff() < 0.0 || row.m.maxCoeff() > 1.0) {
      throw DataError(where + ": counts do not normalize onto the simplex");
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

void write_epidemic_csv(const std::filesystem::path &path,
                        const EpidemicDataset &data) {
  CsvWriter out(path, kSchema);
  for (const auto &r : data.rows) {
    out.cell(r.date).cell(r.confirmed).cell(r.recovered).cell(r.deaths);
    out.cell(r.vaccinations);
    for (int v : r.v) out.cell(v);
    out.end_row();
  }
}

Eigen::Vector3d project_simplex(const Eigen::Vector3d &m) {
  Eigen::Vector3d out = m.cwiseMax(0.0);
  const double total = out.sum();
  if (!(total > 0.0)) return Eigen::Vector3d(1.0, 0.0, 0.0);
  return out / total;
}

std::vector<Eigen::Vector3d> augmentation_noise(const EpidemicDataset &data,
                                                double sigma,
                                                std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("augment_noise: sigma < 0");
  std::vector<Eigen::Vector3d> noise(data.rows.size(), Eigen::Vector3d::Zero());
  if (sigma == 0.0 || data.rows.empty()) return noise;
  Eigen::Vector3d lo = data.rows.front().m, hi = lo;
  for (const auto &r : data.rows) {
    lo = lo.cwiseMin(r.m);
    hi = hi.cwiseMax(r.m);
  }
  const Eigen::Vector3d scale = sigma * (hi - lo);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto &e : noise) {
    for (int j = 0; j < 3; ++j) e(j) = scale(j) * n(rng);
  }
  return noise;
}

EpidemicDataset augment_noise(const EpidemicDataset &data, double sigma,
                              std::uint64_t seed) {
  const auto noise = augmentation_noise(data, sigma, seed);
  EpidemicDataset out = data;
  if (sigma == 0.0) return out;
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    out.rows[k].m = project_simplex(out.rows[k].m + noise[k]);
  }
  return out;
}

bool RateEstimate::all_converged() const {
  return std::all_of(converged.begin(), converged.end(),
                     [](bool c) { return c; });
}

std::vector<Eigen::Vector3d> integrate_kolmogorov(
    const Eigen::Vector3d &m0, const std::vector<RateVector> &rates, int days) {
  std::vector<Eigen::Vector3d> out{m0};
  for (int k = 0; k < days; ++k) {
    const RateVector &r =
        rates.empty() ? RateVector{}
                      : rates[std::min<std::size_t>(k, rates.size() - 1)];
    out.push_back(out.back() + kolmogorov_drift(out.back(), r));
  }
  return out;
}

RateEstimate estimate_rates(const std::vector<Eigen::Vector3d> &states,
                            int window) {
  const int n = static_cast<int>(states.size());
  if (window < 2) throw std::invalid_argument("estimate_rates: window < 2");
  if (n < window) {
    throw std::invalid_argument("estimate_rates: window longer than dataset");
  }
  const int fits = n - window + 1;
  std::vector<RateVector> fitted(static_cast<std::size_t>(fits));
  std::vector<bool> ok(static_cast<std::size_t>(fits));
  Eigen::VectorXd start(3);
  start << 0.2, 0.1, 0.01;
  NelderMeadOptions options;
  options.initial_step = 0.05;
  options.max_iterations = 5000;
  options.f_tolerance = 1e-22;
  options.x_tolerance = 1e-9;
  for (int s = 0; s < fits; ++s) {
    auto objective = [&](const Eigen::VectorXd &x) {
      const RateVector r{std::max(0.0, x(0)), std::max(0.0, x(1)),
                         std::max(0.0, x(2))};
      Eigen::Vector3d m = states[static_cast<std::size_t>(s)];
      double err = 0.0;
      for (int j = 1; j < window; ++j) {
        m += kolmogorov_drift(m, r);
        err += (m - states[static_cast<std::size_t>(s + j)]).squaredNorm();
      }
      return err / (3.0 * (window - 1));
    };
    const auto res = nelder_mead(objective, start, options);
    fitted[static_cast<std::size_t>(s)] = {std::max(0.0, res.x(0)),
                                           std::max(0.0, res.x(1)),
                                           std::max(0.0, res.x(2))};
    ok[static_cast<std::size_t>(s)] = res.converged;
    start = res.x.cwiseMax(0.0);
  }
  RateEstimate out;
  for (int d = 0; d < n; ++d) {
    const int s = std::clamp(d - window / 2, 0, n - window);
    out.rates.push_back(fitted[static_cast<std::size_t>(s)]);
    out.converged.push_back(ok[static_cast<std::size_t>(s)]);
  }
  return out;
}

RateEstimate estimate_rates(const EpidemicDataset &data, int window) {
  return estimate_rates(data.states(), window);
}

EpidemicDataset generate_synthetic(const SyntheticSirConfig &config,
                                   std::uint64_t seed,
                                   std::vector<RateVector> *true_rates) {
  if (config.days < 1) throw std::invalid_argument("synthetic: days < 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, 2);
  EpidemicDataset data;
  data.population = config.population;
  Eigen::Vector3d m = project_simplex(config.m0);
  double recovered = m(2);  // cumulative outflow from I (incl. deaths)
  double vaccinated = 0.0;
  MeasuresVector v{};
  for (int k = 0; k < config.days; ++k) {
    if (config.modulate && config.measure_period > 0 &&
        k % config.measure_period == 0) {
      for (int &x : v) x = level(rng);
    }
    EpidemicRow row;
    row.date = add_days(config.start_date, k);
    row.v = v;
    const double pop = config.population;
    const auto infected = std::llround(m(1) * pop);
    const auto out_i = std::llround(recovered * pop);
    row.deaths = std::llround(config.death_share * recovered * pop);
    row.recovered = out_i - row.deaths;
    row.confirmed = infected + out_i;
    row.vaccinations = std::llround(vaccinated * pop);
    row.m = normalize_counts(row, pop);
    data.rows.push_back(row);

    RateVector r = config.rates;
    if (config.modulate) {
      const auto severe = std::count(v.begin(), v.end(), 2);
      r.gamma *= std::pow(config.severe_factor, static_cast<double>(severe));
    }
    if (true_rates != nullptr) true_rates->push_back(r);
    recovered += r.rho * m(1);
    vaccinated += r.pi * m(0);
    m += kolmogorov_drift(m, r);
  }
  return data;
}

SirModel make_sir_model(const SirModelConfig &config,
                        std::vector<RateVector> base_rates) {
  if (config.drift_net.input_dim != 13 || config.drift_net.output_dim != 6) {
    throw std::invalid_argument("sir: drift network must map 13 -> 6");
  }
  if (config.diffusion_net.input_dim != 13 ||
      config.diffusion_net.output_dim != 3) {
    throw std::invalid_argument("sir: diffusion network must map 13 -> 3");
  }
  return SirModel{config, mlp_init(config.drift_net),
                  mlp_init(config.diffusion_net), std::move(base_rates)};
}

namespace {

struct SirContext {
  int k = 0;
};

template <typename T>
const T &hold_last(const std::vector<T> &xs, int k, const T &fallback) {
  if (xs.empty()) return fallback;
  return xs[std::min<std::size_t>(static_cast<std::size_t>(k), xs.size() - 1)];
}

}  // namespace

template <typename Scalar>
std::vector<Vector<Scalar>> simulate_sir(
    const SirModelConfig &config, const MlpParams<Scalar> *drift,
    const MlpParams<Scalar> *diffusion, const std::vector<RateVector> &rates,
    const std::vector<MeasuresVector> &measures, const Eigen::Vector3d &m0,
    int days, const BrownianPath *noise, std::vector<RateVector> *effective) {
  if (days < 0) throw std::invalid_argument("simulate_sir: days < 0");
  const Vector<Scalar> x0 = Eigen::VectorXd(m0).cast<Scalar>();
  if (days == 0) return {x0};
  static const RateVector kNoRates{};
  static const MeasuresVector kNoMeasures{};

  SdeProblem<Scalar, SirContext> problem;
  problem.base_drift = [&](double, const Vector<Scalar> &x,
                           const SirContext &ctx) {
    const RateVector &r = hold_last(rates, ctx.k, kNoRates);
    if (drift == nullptr) {
      if (effective != nullptr) effective->push_back(r);
      return kolmogorov_drift<Scalar>(x, Scalar(r.gamma), Scalar(r.rho),
                                      Scalar(r.pi));
    }
    const auto d =
        neural_drift<Scalar>(x, r, hold_last(measures, ctx.k, kNoMeasures),
                             *drift, config.scales, config.use_measures);
    if (effective != nullptr) {
      effective->push_back({value_of(d.rates(0)), value_of(d.rates(1)),
                            value_of(d.rates(2))});
    }
    return d.dm;
  };
  if (diffusion != nullptr && noise != nullptr) {
    problem.neural_diffusion = [&](double, const Vector<Scalar> &x,
                                   const SirContext &ctx) {
      const Vector<Scalar> in = sir_features<Scalar>(
          x, hold_last(rates, ctx.k, kNoRates),
          hold_last(measures, ctx.k, kNoMeasures), config.use_measures);
      return Vector<Scalar>(mlp_forward(*diffusion, in) * config.scales.noise);
    };
  }
  Vector<Scalar> previous = x0;
  const BrownianPath none;
  return integrate<Scalar, SirContext>(
      problem, x0, TimeGrid(0.0, static_cast<double>(days), days),
      noise != nullptr && diffusion != nullptr ? *noise : none,
      [&](int k, double, const Vector<Scalar> &x) {
        previous = x;
        return SirContext{k};
      },
      [&](int, const Vector<Scalar> &next) {
        // Zero-sum increment, then clamp at zero and renormalize.
        Vector<Scalar> inc = next - previous;
        const Scalar shift = (inc(0) + inc(1) + inc(2)) / 3.0;
        Vector<Scalar> y(3);
        for (int j = 0; j < 3; ++j) {
          y(j) = clamp_straight_through(previous(j) + inc(j) - shift, 0.0, 1.0);
        }
        const Scalar total = y(0) + y(1) + y(2);
        return Vector<Scalar>(y / total);
      });
}

template std::vector<Vector<double>> simulate_sir(
    const SirModelConfig &, const MlpParams<double> *, const MlpParams<double> *,
    const std::vector<RateVector> &, const std::vector<MeasuresVector> &,
    const Eigen::Vector3d &, int, const BrownianPath *, std::vector<RateVector> *);
template std::vector<Vector<Var>> simulate_sir(
    const SirModelConfig &, const MlpParams<Var> *, const MlpParams<Var> *,
    const std::vector<RateVector> &, const std::vector<MeasuresVector> &,
    const Eigen::Vector3d &, int, const BrownianPath *, std::vector<RateVector> *);

SirGame::SirGame(SirModel &model, Eigen::Vector3d m0,
                 std::vector<std::vector<Eigen::Vector3d>> targets,
                 std::vector<MeasuresVector> measures)
    : model_(model),
      m0_(std::move(m0)),
      targets_(std::move(targets)),
      measures_(std::move(measures)) {
  if (targets_.empty() || targets_.front().size() < 2) {
    throw std::invalid_argument("sir: need at least one 2-day target");
  }
}

std::vector<Mlp *> SirGame::networks() {
  std::vector<Mlp *> nets;
  if (model_.config.learn_drift) nets.push_back(&model_.drift);
  if (model_.config.learn_diffusion) nets.push_back(&model_.diffusion);
  return nets;
}

LossTerms SirGame::play(Tape &, std::span<const MlpParams<Var>> params,
                        const GameIndex &index) const {
  const auto &target =
      targets_[static_cast<std::size_t>(index.game) % targets_.size()];
  const int days = static_cast<int>(target.size()) - 1;
  std::size_t slot = 0;
  const MlpParams<Var> *drift =
      model_.config.learn_drift ? &params[slot++] : nullptr;
  const MlpParams<Var> *diffusion =
      model_.config.learn_diffusion ? &params[slot++] : nullptr;
  BrownianPath noise;
  if (diffusion != nullptr) {
    noise = sample_brownian(TimeGrid(0.0, days, days), 3, index.seed);
  }
  const auto traj =
      simulate_sir<Var>(model_.config, drift, diffusion, model_.base_rates,
                        measures_, m0_, days, &noise);
  Var cost(0.0);
  for (int k = 1; k <= days; ++k) {
    for (int j = 0; j < 3; ++j) {
      cost += square(traj[static_cast<std::size_t>(k)](j) -
                     target[static_cast<std::size_t>(k)](j));
    }
  }
  // Running cost only: 1/2 of the mean squared state error.
  return {cost * (0.5 / days), Var(0.0)};
}

SirTrainResult train_sir(const EpidemicDataset &data,
                         const SirModelConfig &model_config,
                         const SirTrainConfig &config) {
  if (config.trajectories < 1) {
    throw std::invalid_argument("train_sir: trajectories must be >= 1");
  }
  RateEstimate warm = estimate_rates(data, config.window);
  SirModel model = make_sir_model(model_config, warm.rates);
  std::vector<std::vector<Eigen::Vector3d>> targets;
  for (int j = 0; j < config.trajectories; ++j) {
    targets.push_back(
        augment_noise(data, config.noise_sigma,
                      derive_seed(config.training.seed, 7,
                                  static_cast<std::uint64_t>(j)))
            .states());
  }
  SirGame game(model, data.rows.front().m, std::move(targets),
               data.measures());
  TrainingConfig tc = config.training;
  tc.epochs = config.epochs;
  tc.games_per_epoch = config.trajectories;
  TrainingHistory history = train(game, tc);
  return {std::move(model), std::move(history), std::move(warm)};
}

std::vector<Eigen::Vector3d> forecast(const SirModel &model,
                                      const Eigen::Vector3d &initial, int days,
                                      const std::vector<MeasuresVector> &v_series,
                                      std::vector<RateVector> *effective) {
  if (days < 0) throw std::invalid_argument("forecast: days < 0");
  if (static_cast<int>(v_series.size()) < days) {
    throw std::invalid_argument("forecast: measure series shorter than horizon");
  }
  const auto traj = simulate_sir<double>(
      model.config, model.config.learn_drift ? &model.drift.params() : nullptr,
      nullptr, model.base_rates, v_series, initial, days, nullptr, effective);
  std::vector<Eigen::Vector3d> out;
  out.reserve(traj.size());
  for (const auto &x : traj) out.emplace_back(x);
  return out;
}

double trajectory_mse(const SirModel &model,
                      const std::vector<Eigen::Vector3d> &truth,
                      const std::vector<MeasuresVector> &measures, int paths,
                      std::uint64_t seed) {
  if (truth.size() < 2 || paths < 1) {
    throw std::invalid_argument("trajectory_mse: empty input");
  }
  const int days = static_cast<int>(truth.size()) - 1;
  double total = 0.0;
  for (int p = 0; p < paths; ++p) {
    const BrownianPath noise = sample_brownian(
        TimeGrid(0.0, days, days), 3, derive_seed(seed, static_cast<std::uint64_t>(p)));
    const auto traj = simulate_sir<double>(
        model.config, model.config.learn_drift ? &model.drift.params() : nullptr,
        model.config.learn_diffusion ? &model.diffusion.params() : nullptr,
        model.base_rates, measures, truth.front(), days, &noise);
    for (int k = 1; k <= days; ++k) {
      total += (traj[static_cast<std::size_t>(k)] -
                Eigen::VectorXd(truth[static_cast<std::size_t>(k)]))
                   .squaredNorm();
    }
  }
  return total / (3.0 * days * paths);
}

}  // namespace nmfg
