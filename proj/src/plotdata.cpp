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


#include "nmfg/plotdata.hpp"

#include <stdexcept>

#include "nmfg/csv.hpp"

namespace nmfg {

void emit_histogram_csv(const std::filesystem::path &path,
                        const std::vector<TurnSample> &samples) {
  if (samples.empty()) throw std::invalid_argument("plotdata: empty selection");
  for (const auto &s : samples) {
    if (s.values.size() == 0) throw std::invalid_argument("plotdata: empty turn");
  }
  CsvWriter out(path, {"turn", "value", "weight"});
  for (const auto &s : samples) {
    const double weight = 1.0 / static_cast<double>(s.values.size());
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      out.cell(s.turn).cell(s.values(i)).cell(weight);
      out.end_row();
    }
  }
}

}  // namespace nmfg
