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


#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>

#include "../tools/manifest.hpp"
#include "nmfg/csv.hpp"
#include "nmfg/plotdata.hpp"

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "nmfg_plot_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<nmfg::TurnSample> random_samples() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1e3);
  std::vector<nmfg::TurnSample> samples;
  for (int turn = 1; turn <= 4; ++turn) {
    Eigen::VectorXd v(3 + turn * 7);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng) / 7.0;
    samples.push_back({turn, v});
  }
  return samples;
}

}  // namespace

TEST_CASE("histogram csv rejects an empty selection") {
  const auto path = scratch_dir() / "empty.csv";
  CHECK_THROWS_AS(nmfg::emit_histogram_csv(path, {}), std::invalid_argument);
  CHECK_THROWS_AS(nmfg::emit_histogram_csv(path, {{1, Eigen::VectorXd()}}),
                  std::invalid_argument);
}

TEST_CASE("histogram weights per turn sum to one") {
  const auto path = scratch_dir() / "weights.csv";
  nmfg::emit_histogram_csv(path, random_samples());
  const auto table = nmfg::read_csv(path);
  CHECK(table.header == std::vector<std::string>{"turn", "value", "weight"});
  std::map<std::string, double> sums;
  for (const auto &row : table.rows) sums[row[0]] += std::stod(row[2]);
  CHECK(sums.size() == 4);
  for (const auto &[turn, sum] : sums) CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram csv round-trips values exactly") {
  const auto path = scratch_dir() / "roundtrip.csv";
  const auto samples = random_samples();
  nmfg::emit_histogram_csv(path, samples);
  const auto table = nmfg::read_csv(path);
  std::size_t row = 0;
  for (const auto &s : samples) {
    for (Eigen::Index i = 0; i < s.values.size(); ++i, ++row) {
      CHECK(std::stoi(table.rows[row][0]) == s.turn);
      CHECK(std::stod(table.rows[row][1]) == s.values(i));
    }
  }
  CHECK(row == table.rows.size());
}

TEST_CASE("git blob hash matches git hash-object") {
  CHECK(nmfg::tools::git_blob_sha1("hello\n") ==
        "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(nmfg::tools::git_blob_sha1("") ==
        "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("manifest hash changes iff an output byte changes") {
  const auto dir = scratch_dir() / "manifest";
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string &text) {
    std::ofstream(dir / "out.csv") << text;
    nmfg::tools::write_manifest(dir, {{"seed", 1}}, {"out.csv"});
    std::ifstream in(dir / "manifest.json");
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  const auto a = write("a,b\n1,2\n");
  CHECK(write("a,b\n1,2\n") == a);
  CHECK(write("a,b\n1,3\n") != a);
}
