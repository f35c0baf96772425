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

#include "nmfg/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "nmfg/adabelief.hpp"

namespace nmfg {

bool within_reference_ranges(const MlpConfig &config) {
  return config.hidden_layers >= 3 && config.hidden_layers <= 8 &&
         config.hidden_width >= 8 && config.hidden_width <= 32;
}

Mlp::Mlp(MlpConfig config, MlpParams<double> params)
    : config_(config), params_(std::move(params)) {
  if (params_.weights.size() != params_.biases.size() ||
      params_.weights.empty()) {
    throw std::invalid_argument("Mlp: layer count mismatch");
  }
  Eigen::Index in = config_.input_dim;
  for (std::size_t l = 0; l < params_.weights.size(); ++l) {
    if (params_.weights[l].cols() != in ||
        params_.biases[l].size() != params_.weights[l].rows()) {
      throw std::invalid_argument("Mlp: layer dimensions do not chain");
    }
    in = params_.weights[l].rows();
  }
  if (in != config_.output_dim) {
    throw std::invalid_argument("Mlp: output dimension mismatch");
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < params_.weights.size(); ++l) {
    n += params_.weights[l].size() + params_.biases[l].size();
  }
  return n;
}

Eigen::VectorXd Mlp::flat() const {
  Eigen::VectorXd out(parameter_count());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < params_.weights.size(); ++l) {
    const auto &w = params_.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out(k++) = w(r, c);
    }
    for (Eigen::Index r = 0; r < params_.biases[l].size(); ++r) {
      out(k++) = params_.biases[l](r);
    }
  }
  return out;
}

void Mlp::set_flat(const Eigen::VectorXd &flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw std::invalid_argument("set_flat: size mismatch");
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < params_.weights.size(); ++l) {
    auto &w = params_.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat(k++);
    }
    for (Eigen::Index r = 0; r < params_.biases[l].size(); ++r) {
      params_.biases[l](r) = flat(k++);
    }
  }
}

bool Mlp::all_finite() const { return flat().allFinite(); }

Mlp mlp_init(const MlpConfig &config) {
  if (config.input_dim <= 0 || config.output_dim <= 0 ||
      config.hidden_layers < 0 ||
      (config.hidden_layers > 0 && config.hidden_width <= 0)) {
    throw std::invalid_argument("mlp_init: invalid dimensions");
  }
  std::mt19937_64 rng(config.seed);
  MlpParams<double> params;
  int in = config.input_dim;
  for (int l = 0; l <= config.hidden_layers; ++l) {
    const int out =
        l == config.hidden_layers ? config.output_dim : config.hidden_width;
    const double bound = std::sqrt(1.0 / in);
    std::uniform_real_distribution<double> uniform(-bound, bound);
    Matrix<double> w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = uniform(rng);
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(Vector<double>::Zero(out));
    in = out;
  }
  return Mlp(config, std::move(params));
}

MlpParams<Var> bind(const Mlp &net, Tape &tape) {
  MlpParams<Var> out;
  for (std::size_t l = 0; l < net.params().weights.size(); ++l) {
    const auto &w = net.params().weights[l];
    Matrix<Var> wv(w.rows(), w.cols());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        wv(r, c) = tape.variable(w(r, c));
      }
    }
    const auto &b = net.params().biases[l];
    Vector<Var> bv(b.size());
    for (Eigen::Index r = 0; r < b.size(); ++r) bv(r) = tape.variable(b(r));
    out.weights.push_back(std::move(wv));
    out.biases.push_back(std::move(bv));
  }
  return out;
}

MlpParams<Var> constant_params(const Mlp &net) {
  MlpParams<Var> out;
  for (std::size_t l = 0; l < net.params().weights.size(); ++l) {
    out.weights.push_back(net.params().weights[l].cast<Var>());
    out.biases.push_back(net.params().biases[l].cast<Var>());
  }
  return out;
}

Eigen::VectorXd gradient_of(const MlpParams<Var> &bound) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < bound.weights.size(); ++l) {
    n += bound.weights[l].size() + bound.biases[l].size();
  }
  Eigen::VectorXd out(n);
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < bound.weights.size(); ++l) {
    const auto &w = bound.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out(k++) = w(r, c).grad();
    }
    for (Eigen::Index r = 0; r < bound.biases[l].size(); ++r) {
      out(k++) = bound.biases[l](r).grad();
    }
  }
  return out;
}

double lipschitz_bound(const Mlp &net) {
  double bound = 1.0;
  for (const auto &w : net.params().weights) {
    // Power iteration on W^T W.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(w.cols()).normalized();
    double sigma = 0.0;
    for (int it = 0; it < 500; ++it) {
      Eigen::VectorXd u = w.transpose() * (w * v);
      const double norm = u.norm();
      if (norm == 0.0) break;
      v = u / norm;
      const double next = std::sqrt(norm);
      if (std::abs(next - sigma) < 1e-12 * std::max(1.0, next)) {
        sigma = next;
        break;
      }
      sigma = next;
    }
    bound *= sigma;
  }
  return bound;
}

std::string to_json(const Mlp &net) {
  nlohmann::json j;
  j["format"] = "nmfg-mlp";
  j["version"] = 1;
  const auto &c = net.config();
  j["config"] = {{"input_dim", c.input_dim},
                 {"output_dim", c.output_dim},
                 {"hidden_layers", c.hidden_layers},
                 {"hidden_width", c.hidden_width},
                 {"seed", c.seed}};
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.params().weights.size(); ++l) {
    const auto &w = net.params().weights[l];
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index cc = 0; cc < w.cols(); ++cc) row.push_back(w(r, cc));
      rows.push_back(std::move(row));
    }
    nlohmann::json bias = nlohmann::json::array();
    for (Eigen::Index r = 0; r < net.params().biases[l].size(); ++r) {
      bias.push_back(net.params().biases[l](r));
    }
    layers.push_back({{"weights", std::move(rows)}, {"bias", std::move(bias)}});
  }
  j["layers"] = std::move(layers);
  return j.dump(1);
}

Mlp mlp_from_json(const std::string &text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "nmfg-mlp") {
    throw std::invalid_argument("checkpoint: unexpected format tag");
  }
  MlpConfig config;
  const auto &c = j.at("config");
  config.input_dim = c.at("input_dim").get<int>();
  config.output_dim = c.at("output_dim").get<int>();
  config.hidden_layers = c.at("hidden_layers").get<int>();
  config.hidden_width = c.at("hidden_width").get<int>();
  config.seed = c.at("seed").get<std::uint64_t>();
  MlpParams<double> params;
  for (const auto &layer : j.at("layers")) {
    const auto &rows = layer.at("weights");
    const auto nrows = static_cast<Eigen::Index>(rows.size());
    const auto ncols =
        nrows > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
    Matrix<double> w(nrows, ncols);
    for (Eigen::Index r = 0; r < nrows; ++r) {
      if (static_cast<Eigen::Index>(rows.at(r).size()) != ncols) {
        throw std::invalid_argument("checkpoint: ragged weight matrix");
      }
      for (Eigen::Index cc = 0; cc < ncols; ++cc) {
        w(r, cc) = rows.at(r).at(cc).get<double>();
      }
    }
    const auto &bias = layer.at("bias");
    Vector<double> b(static_cast<Eigen::Index>(bias.size()));
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = bias.at(r).get<double>();
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return Mlp(config, std::move(params));
}

void save_checkpoint(const Mlp &net, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(net) << '\n';
}

Mlp load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return mlp_from_json(buffer.str());
}

void adabelief_step(Eigen::Ref<Eigen::VectorXd> params,
                    const Eigen::VectorXd &grads, AdaBeliefState &state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adabelief_step: shape mismatch");
  }
  if (!grads.allFinite()) {
    throw std::invalid_argument("adabelief_step: non-finite gradient");
  }
  const auto &o = state.options;
  ++state.step;
  state.m = o.beta1 * state.m + (1.0 - o.beta1) * grads;
  state.s = o.beta2 * state.s +
            (1.0 - o.beta2) * (grads - state.m).cwiseAbs2();
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  params.array() -= o.lr * (state.m.array() / c1) /
                    ((state.s.array() / c2).sqrt() + o.eps);
}

void adabelief_step(Mlp &net, const Eigen::VectorXd &grads,
                    AdaBeliefState &state) {
  Eigen::VectorXd flat = net.flat();
  adabelief_step(flat, grads, state);
  net.set_flat(flat);
}

}  // namespace nmfg
