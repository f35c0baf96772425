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

#include "nmfg/sde.hpp"

#include <random>

#include "nmfg/csv.hpp"

namespace nmfg {

TimeGrid::TimeGrid(double t0, double t1, int n_steps)
    : t0(t0), t1(t1), n_steps(n_steps) {
  if (n_steps < 0) throw std::invalid_argument("TimeGrid: negative n_steps");
  if (n_steps > 0 && !(t1 > t0)) {
    throw std::invalid_argument("TimeGrid: T must exceed t0");
  }
}

BrownianPath sample_brownian(const TimeGrid &grid, int dim,
                             std::uint64_t seed) {
  if (dim < 0) throw std::invalid_argument("sample_brownian: negative dim");
  BrownianPath path;
  path.seed = seed;
  path.increments.resize(grid.n_steps, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
  for (int k = 0; k < grid.n_steps; ++k) {
    for (int d = 0; d < dim; ++d) path.increments(k, d) = normal(rng);
  }
  return path;
}

void write_trajectory_csv(const std::filesystem::path &path,
                          const TimeGrid &grid,
                          const std::vector<Eigen::VectorXd> &trajectory,
                          const std::vector<std::string> &names) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), names.begin(), names.end());
  CsvWriter csv(path, header);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    if (trajectory[k].size() != static_cast<Eigen::Index>(names.size())) {
      throw std::invalid_argument("write_trajectory_csv: width mismatch");
    }
    csv.cell(grid.time(static_cast<int>(k)));
    for (Eigen::Index i = 0; i < trajectory[k].size(); ++i) {
      csv.cell(trajectory[k](i));
    }
    csv.end_row();
  }
}

}  // namespace nmfg
