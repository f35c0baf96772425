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


#ifndef NMFG_PLOTDATA_HPP_
#define NMFG_PLOTDATA_HPP_

#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace nmfg {

/// Agent values observed at one turn.
struct TurnSample {
  int turn = 0;
  Eigen::VectorXd values;
};

/// Long-format histogram data `turn,value,weight`, one row per agent, with
/// weights 1/N so that each turn sums to one. Throws std::invalid_argument
/// for an empty selection or an empty turn.
void emit_histogram_csv(const std::filesystem::path &path,
                        const std::vector<TurnSample> &samples);

}  // namespace nmfg

#endif  // NMFG_PLOTDATA_HPP_
