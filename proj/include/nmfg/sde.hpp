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

#ifndef NMFG_SDE_HPP_
#define NMFG_SDE_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nmfg/autodiff.hpp"

namespace nmfg {

struct TimeGrid {
  TimeGrid(double t0, double t1, int n_steps);

  double t0;
  double t1;
  int n_steps;

  double dt() const { return n_steps > 0 ? (t1 - t0) / n_steps : 0.0; }
  double time(int k) const { return t0 + k * dt(); }
};

/// Pre-sampled Wiener increments, one row per step; each entry ~ N(0, dt).
struct BrownianPath {
  Eigen::MatrixXd increments;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(increments.cols()); }
  int steps() const { return static_cast<int>(increments.rows()); }
};

BrownianPath sample_brownian(const TimeGrid &grid, int dim, std::uint64_t seed);

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(int step, const std::string &what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// dx = [b(t, x, ctx) + mu(t, x, ctx)] dt + sigma(t, x, ctx) dB.
///
/// `Context` carries whatever the fields need besides (t, x): the current
/// mean field, controls, exogenous features. The neural fields are optional;
/// when `neural_diffusion` is set it replaces `fixed_diffusion` and its
/// output enters through |.| so noise scales are nonnegative. Diffusion is
/// diagonal: the noise dimension equals the state dimension, or is zero.
template <typename Scalar, typename Context>
struct SdeProblem {
  using State = Vector<Scalar>;
  using Field = std::function<State(double, const State &, const Context &)>;

  Field base_drift;
  Field neural_drift;
  Field fixed_diffusion;
  Field neural_diffusion;
};

template <typename Scalar, typename Context>
Vector<Scalar> em_step(const Vector<Scalar> &x, double t, double dt,
                       const SdeProblem<Scalar, Context> &problem,
                       const Context &context,
                       const Eigen::Ref<const Eigen::VectorXd> &dB,
                       int step_index = 0) {
  Vector<Scalar> drift = problem.base_drift(t, x, context);
  if (problem.neural_drift) drift += problem.neural_drift(t, x, context);
  Vector<Scalar> next = x + drift * dt;
  if (dB.size() > 0) {
    if (dB.size() != x.size()) {
      throw IntegrationError(step_index, "noise dimension must match state");
    }
    if (problem.neural_diffusion) {
      const Vector<Scalar> sigma = problem.neural_diffusion(t, x, context);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        using std::abs;
        next(i) += abs(sigma(i)) * dB(i);
      }
    } else if (problem.fixed_diffusion) {
      const Vector<Scalar> sigma = problem.fixed_diffusion(t, x, context);
      for (Eigen::Index i = 0; i < x.size(); ++i) next(i) += sigma(i) * dB(i);
    }
  }
  for (Eigen::Index i = 0; i < next.size(); ++i) {
    if (!std::isfinite(value_of(next(i)))) {
      throw IntegrationError(step_index, "non-finite state");
    }
  }
  return next;
}

/// Fixed-step Euler-Maruyama over the grid. `context_fn(k, t, x)` is called
/// with the current state before step k, so the mean field seen by step k is
/// the reduction of the population after step k - 1. `post_step(k, x)` may
/// project the new state (clamping, renormalisation) and may be empty.
template <typename Scalar, typename Context>
std::vector<Vector<Scalar>> integrate(
    const SdeProblem<Scalar, Context> &problem, const Vector<Scalar> &x0,
    const TimeGrid &grid, const BrownianPath &path,
    const std::function<Context(int, double, const Vector<Scalar> &)>
        &context_fn,
    const std::function<Vector<Scalar>(int, const Vector<Scalar> &)>
        &post_step = {}) {
  if (path.dim() > 0 && path.steps() < grid.n_steps) {
    throw std::invalid_argument("integrate: Brownian path shorter than grid");
  }
  std::vector<Vector<Scalar>> trajectory;
  trajectory.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  trajectory.push_back(x0);
  const double dt = grid.dt();
  const Eigen::VectorXd no_noise(0);
  for (int k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time(k);
    const Vector<Scalar> &x = trajectory.back();
    const Context context = context_fn(k, t, x);
    Vector<Scalar> next =
        path.dim() > 0
            ? em_step(x, t, dt, problem, context,
                      Eigen::VectorXd(path.increments.row(k).transpose()), k)
            : em_step(x, t, dt, problem, context, no_noise, k);
    if (post_step) next = post_step(k, next);
    trajectory.push_back(std::move(next));
  }
  return trajectory;
}

/// CSV with header `t,<names...>`, one row per grid point.
void write_trajectory_csv(const std::filesystem::path &path,
                          const TimeGrid &grid,
                          const std::vector<Eigen::VectorXd> &trajectory,
                          const std::vector<std::string> &names);

}  // namespace nmfg

#endif  // NMFG_SDE_HPP_
