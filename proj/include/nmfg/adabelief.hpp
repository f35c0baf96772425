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

#ifndef NMFG_ADABELIEF_HPP_
#define NMFG_ADABELIEF_HPP_

#include <Eigen/Core>

#include "nmfg/mlp.hpp"

namespace nmfg {

struct AdaBeliefOptions {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-16;
};

struct AdaBeliefState {
  explicit AdaBeliefState(Eigen::Index size, AdaBeliefOptions options = {})
      : m(Eigen::VectorXd::Zero(size)),
        s(Eigen::VectorXd::Zero(size)),
        options(options) {}

  long step = 0;
  Eigen::VectorXd m;  // first moment
  Eigen::VectorXd s;  // belief: EMA of (g - m)^2
  AdaBeliefOptions options;
};

// m <- b1 m + (1 - b1) g;  s <- b2 s + (1 - b2) (g - m)^2;
// theta <- theta - lr * mhat / (sqrt(shat) + eps) with bias-corrected mhat,
// shat. Throws std::invalid_argument for non-finite gradients or a shape
// mismatch.
void adabelief_step(Eigen::Ref<Eigen::VectorXd> params,
                    const Eigen::VectorXd &grads, AdaBeliefState &state);

void adabelief_step(Mlp &net, const Eigen::VectorXd &grads,
                    AdaBeliefState &state);

}  // namespace nmfg

#endif  // NMFG_ADABELIEF_HPP_
