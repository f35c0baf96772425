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
#ifndef NMFG_NELDER_MEAD_HPP_
#define NMFG_NELDER_MEAD_HPP_

#include <functional>

#include <Eigen/Core>

namespace nmfg {

struct NelderMeadOptions {
  double initial_step = 0.1;  // simplex edge along each axis
  int max_iterations = 2000;
  double f_tolerance = 1e-14;  // spread of vertex values
  double x_tolerance = 1e-10;  // simplex diameter
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization with the standard reflection (1),
/// expansion (2), contraction (1/2) and shrink (1/2) coefficients.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd &)> &f,
    const Eigen::VectorXd &x0, const NelderMeadOptions &options = {});

}  // namespace nmfg

#endif  // NMFG_NELDER_MEAD_HPP_
