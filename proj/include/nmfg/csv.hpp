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

#ifndef NMFG_CSV_HPP_
#define NMFG_CSV_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace nmfg {

// 17 significant digits, enough for any double to round-trip.
std::string format_real(double value);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path &path,
            const std::vector<std::string> &header);

  CsvWriter &cell(const std::string &text);
  CsvWriter &cell(double value);
  CsvWriter &cell(long long value);
  CsvWriter &cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter &cell(std::size_t value) {
    return cell(static_cast<long long>(value));
  }
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws std::out_of_range if absent.
  std::size_t column(const std::string &name) const;
};

CsvTable read_csv(const std::filesystem::path &path);
std::vector<std::string> split_csv_line(const std::string &line);

}  // namespace nmfg

#endif  // NMFG_CSV_HPP_
