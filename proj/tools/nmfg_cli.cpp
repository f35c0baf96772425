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


// nmfg: runs one game end to end and writes CSV/JSON artifacts plus a
// manifest.json that hashes every output.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "manifest.hpp"
#include "nmfg/csv.hpp"
#include "nmfg/dice.hpp"
#include "nmfg/elfarol.hpp"
#include "nmfg/meeting.hpp"
#include "nmfg/mfg.hpp"
#include "nmfg/plotdata.hpp"
#include "nmfg/sde.hpp"
#include "nmfg/sir.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string game;
  std::string mode = "neural";
  std::uint64_t seed = 0;
  std::string out = "out";
  std::optional<int> epochs;
  std::string data;
  int threads = 1;
  bool reproducible = false;
};

struct SirOptions {
  int trajectories = 100;
  int horizon = 30;
  double noise = 0.05;
  double population = nmfg::kDefaultPopulation;
  int window = 28;
  int days = 120;  // synthetic benchmark length when --data is absent
  bool measures = true;
};

struct DiceOptions {
  nmfg::DiceConfig config;
  std::string theta;
  std::string theta_hat;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Artifacts written so far, relative to the output directory.
struct Outputs {
  fs::path dir;
  std::vector<std::string> files;

  fs::path add(const std::string &name) {
    files.push_back(name);
    return dir / name;
  }
};

Eigen::VectorXd parse_list(const std::string &text, const std::string &key) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw ConfigError(key + ": not a number list: " + text);
    }
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

nmfg::TrainingConfig training_config(const Common &c, int default_epochs) {
  nmfg::TrainingConfig t;
  t.epochs = c.epochs.value_or(default_epochs);
  t.seed = nmfg::derive_seed(c.seed, 1);
  t.threads = c.reproducible ? 1 : c.threads;
  nmfg::validate(t);
  return t;
}

template <typename History, typename Values>
std::vector<nmfg::TurnSample> samples_of(const History &history,
                                         Values values) {
  std::vector<nmfg::TurnSample> out;
  for (const auto &snap : history) out.push_back({snap.turn, values(snap)});
  return out;
}

json run_meeting(const Common &c, nmfg::MeetingConfig config, int games,
                 Outputs &out) {
  nmfg::validate(config);
  json echo = {{"agents", config.agents},
               {"turns", config.turns},
               {"quorum", config.quorum}};
  nmfg::MeetingHistory history;
  if (c.mode == "standard") {
    history = nmfg::run_standard(config, c.seed);
  } else {
    auto training = training_config(c, 40);
    training.games_per_epoch = games;
    echo["epochs"] = training.epochs;
    echo["games"] = games;
    const auto observations =
        nmfg::generate_observations(10, 20, nmfg::derive_seed(c.seed, 3));
    auto result = nmfg::run_neural(config, observations, training,
                                   nmfg::meeting_net_config(nmfg::derive_seed(c.seed, 2)),
                                   nmfg::derive_seed(c.seed, 4));
    history = std::move(result.history);
    result.training.write_csv(out.add("loss.csv"));
    nmfg::save_checkpoint(result.net, out.add("checkpoint.json"));
  }
  nmfg::write_meeting_csv(out.add("trajectories.csv"), history);
  nmfg::emit_histogram_csv(
      out.add("plot.csv"),
      samples_of(history, [](const auto &s) { return s.tau_tilde; }));
  return echo;
}

json run_elfarol(const Common &c, nmfg::BarConfig config, Outputs &out) {
  nmfg::validate(config);
  json echo = {{"threshold", config.c},
               {"agents", config.agents},
               {"turns", config.turns}};
  nmfg::BarHistory history;
  if (c.mode == "standard") {
    history = nmfg::run_standard(config, c.seed);
  } else {
    const auto training = training_config(c, 40);
    echo["epochs"] = training.epochs;
    const auto observations = nmfg::generate_attendance_observations(
        10, 20, nmfg::derive_seed(c.seed, 3));
    auto result = nmfg::run_neural(config, observations, training,
                                   nmfg::bar_net_config(nmfg::derive_seed(c.seed, 2)),
                                   nmfg::derive_seed(c.seed, 4));
    history = std::move(result.history);
    result.training.write_csv(out.add("loss.csv"));
    nmfg::save_checkpoint(result.net, out.add("checkpoint.json"));
  }
  nmfg::write_bar_csv(out.add("trajectories.csv"), history);
  nmfg::emit_histogram_csv(out.add("plot.csv"),
                           samples_of(history, [](const auto &s) { return s.p; }));
  return echo;
}

json run_sir(const Common &c, const SirOptions &o, Outputs &out) {
  if (o.horizon < 0) throw ConfigError("sir.horizon must be >= 0");
  if (!(o.population > 0.0)) throw ConfigError("sir.population must be > 0");
  json echo = {{"trajectories", o.trajectories}, {"horizon", o.horizon},
               {"noise", o.noise},               {"population", o.population},
               {"window", o.window},             {"measures", o.measures}};
  nmfg::EpidemicDataset data;
  if (c.data.empty()) {
    nmfg::SyntheticSirConfig synthetic;
    synthetic.days = o.days;
    synthetic.population = o.population;
    data = nmfg::generate_synthetic(synthetic, nmfg::derive_seed(c.seed, 5));
    nmfg::write_epidemic_csv(out.add("data.csv"), data);
    echo["days"] = o.days;
  } else {
    data = nmfg::ingest_csv(c.data, o.population);
    echo["data"] = c.data;
  }
  if (data.days() < 2) throw nmfg::DataError("data: need at least 2 days");

  nmfg::SirModelConfig model_config;
  model_config.drift_net.seed = nmfg::derive_seed(c.seed, 6);
  model_config.diffusion_net.seed = nmfg::derive_seed(c.seed, 7);
  model_config.use_measures = o.measures;
  std::optional<nmfg::SirModel> model;
  if (c.mode == "standard") {
    model_config.learn_drift = false;
    model_config.learn_diffusion = false;
    model = nmfg::make_sir_model(model_config,
                                 nmfg::estimate_rates(data, o.window).rates);
  } else {
    nmfg::SirTrainConfig train;
    train.training = training_config(c, 200);
    train.epochs = train.training.epochs;
    train.trajectories = o.trajectories;
    train.noise_sigma = o.noise;
    train.window = o.window;
    echo["epochs"] = train.epochs;
    auto result = nmfg::train_sir(data, model_config, train);
    result.history.write_csv(out.add("loss.csv"));
    nmfg::save_checkpoint(result.model.drift, out.add("drift.json"));
    nmfg::save_checkpoint(result.model.diffusion, out.add("diffusion.json"));
    model = std::move(result.model);
  }

  // Fit over the observed span, then hold the last rates and measures.
  const int span = data.days() - 1 + o.horizon;
  auto measures = data.measures();
  measures.resize(static_cast<std::size_t>(span), measures.back());
  std::vector<nmfg::RateVector> effective;
  const auto path =
      nmfg::forecast(*model, data.rows.front().m, span, measures, &effective);
  const std::string &start = data.rows.front().date;
  {
    nmfg::CsvWriter csv(out.add("forecast.csv"),
                        {"date", "m_S", "m_I", "m_R", "source"});
    for (const auto &row : data.rows) {
      csv.cell(row.date).cell(row.m(0)).cell(row.m(1)).cell(row.m(2));
      csv.cell(std::string("observed")).end_row();
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      csv.cell(nmfg::add_days(start, static_cast<int>(k)))
          .cell(path[k](0)).cell(path[k](1)).cell(path[k](2));
      csv.cell(std::string("predicted")).end_row();
    }
  }
  nmfg::CsvWriter rates(out.add("rates.csv"), {"date", "gamma", "rho", "pi"});
  for (std::size_t k = 0; k < effective.size(); ++k) {
    rates.cell(nmfg::add_days(start, static_cast<int>(k)))
        .cell(effective[k].gamma).cell(effective[k].rho).cell(effective[k].pi);
    rates.end_row();
  }
  return echo;
}

json run_dice(const Common &c, DiceOptions o, Outputs &out) {
  if (!o.theta.empty()) o.config.theta = parse_list(o.theta, "dice.theta");
  if (!o.theta_hat.empty()) {
    o.config.theta_hat0 = parse_list(o.theta_hat, "dice.theta-hat");
  }
  o.config.neural = c.mode == "neural";
  nmfg::validate(o.config);
  const auto &d = o.config;
  json echo = {{"players", d.players}, {"dice", d.dice},
               {"rounds", d.rounds},   {"lambda0", d.lambda0},
               {"likelihood", d.likelihood}};
  const auto odds = d.true_odds();
  const auto beliefs = d.initial_beliefs();
  echo["theta"] = std::vector<double>(odds.data(), odds.data() + odds.size());
  echo["theta_hat"] =
      std::vector<double>(beliefs.data(), beliefs.data() + beliefs.size());
  const auto result = nmfg::train_dice(d, c.seed);
  nmfg::write_dice_history_csv(out.add("history.csv"), result.history);
  nmfg::write_analysis_csv(out.add("analysis.csv"),
                           nmfg::analyze({result.history}));
  if (d.neural) nmfg::save_checkpoint(result.net, out.add("checkpoint.json"));
  return echo;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Neural mean-field games: meeting, elfarol, sir, dice."};
  app.set_config("--config", "", "Key-value file; [game] sections hold game options");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(0, 1);

  Common c;
  app.add_option("--game", c.game, "Game to run")
      ->check(CLI::IsMember({"meeting", "elfarol", "sir", "dice"}));
  app.add_option("--mode", c.mode, "standard or neural")
      ->check(CLI::IsMember({"standard", "neural"}))
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Base seed")->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--epochs", c.epochs, "Training epochs (game default if unset)");
  app.add_option("--data", c.data, "Epidemic CSV for sir");
  app.add_option("--threads", c.threads, "Worker threads for training")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--reproducible", c.reproducible, "Force single-threaded runs");

  app.add_subcommand("run", "Run the game named by --game")->fallthrough();

  nmfg::MeetingConfig meeting;
  int meeting_games = 10;
  auto *m = app.add_subcommand("meeting", "Meeting arrival times")->fallthrough();
  m->add_option("--agents", meeting.agents)->capture_default_str();
  m->add_option("--turns", meeting.turns)->capture_default_str();
  m->add_option("--quorum", meeting.quorum)->capture_default_str();
  m->add_option("--games", meeting_games, "Games per epoch")
      ->check(CLI::PositiveNumber)->capture_default_str();

  nmfg::BarConfig bar;
  auto *e = app.add_subcommand("elfarol", "El Farol bar")->fallthrough();
  e->add_option("--threshold", bar.c)->capture_default_str();
  e->add_option("--agents", bar.agents)->capture_default_str();
  e->add_option("--turns", bar.turns)->capture_default_str();

  SirOptions sir;
  auto *s = app.add_subcommand("sir", "SIR epidemic")->fallthrough();
  s->add_option("--trajectories", sir.trajectories)->capture_default_str();
  s->add_option("--horizon", sir.horizon, "Forecast days past the data")
      ->capture_default_str();
  s->add_option("--noise", sir.noise, "Augmentation noise sigma")
      ->capture_default_str();
  s->add_option("--population", sir.population)->capture_default_str();
  s->add_option("--window", sir.window, "Rate-fit window (days)")
      ->capture_default_str();
  s->add_option("--days", sir.days, "Synthetic benchmark length")
      ->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--measures", sir.measures, "Feed measures to the networks")
      ->capture_default_str();

  DiceOptions dice;
  auto *d = app.add_subcommand("dice", "Liar's dice")->fallthrough();
  d->add_option("--players", dice.config.players)->capture_default_str();
  d->add_option("--dice", dice.config.dice, "Dice per player")->capture_default_str();
  d->add_option("--rounds", dice.config.rounds)->capture_default_str();
  d->add_option("--lambda0", dice.config.lambda0, "Initial bluff rate")
      ->capture_default_str();
  d->add_option("--likelihood", dice.config.likelihood, "Challenge threshold")
      ->capture_default_str();
  d->add_option("--theta", dice.theta, "True face odds, comma separated");
  d->add_option("--theta-hat", dice.theta_hat, "Initial beliefs, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp &err) {
    return app.exit(err);
  } catch (const CLI::ParseError &err) {
    std::cerr << "nmfg: config error: " << err.what() << '\n';
    return 2;
  }

  for (auto *sub : {m, e, s, d}) {
    if (!sub->parsed()) continue;
    if (!c.game.empty() && c.game != sub->get_name()) {
      std::cerr << "nmfg: config error: game: --game " << c.game
                << " conflicts with subcommand " << sub->get_name() << '\n';
      return 2;
    }
    c.game = sub->get_name();
  }
  if (c.game.empty()) {
    std::cerr << "nmfg: config error: game: no game selected\n";
    return 2;
  }

  try {
    Outputs out{c.out, {}};
    fs::create_directories(out.dir);
    json echo = {{"game", c.game}, {"mode", c.mode}, {"seed", c.seed}};
    if (c.game == "meeting") {
      echo[c.game] = run_meeting(c, meeting, meeting_games, out);
    } else if (c.game == "elfarol") {
      echo[c.game] = run_elfarol(c, bar, out);
    } else if (c.game == "sir") {
      echo[c.game] = run_sir(c, sir, out);
    } else {
      echo[c.game] = run_dice(c, dice, out);
    }
    nmfg::tools::write_manifest(out.dir, echo, out.files);
  } catch (const ConfigError &err) {
    std::cerr << "nmfg: config error: " << err.what() << '\n';
    return 2;
  } catch (const std::invalid_argument &err) {
    std::cerr << "nmfg: config error: " << err.what() << '\n';
    return 2;
  } catch (const nmfg::DataError &err) {
    std::cerr << "nmfg: data error: " << err.what() << '\n';
    return 3;
  } catch (const nmfg::TrainingError &err) {
    std::cerr << "nmfg: training error: " << err.what() << '\n';
    return 4;
  } catch (const nmfg::IntegrationError &err) {
    std::cerr << "nmfg: training error: " << err.what() << '\n';
    return 4;
  } catch (const std::exception &err) {
    std::cerr << "nmfg: error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
