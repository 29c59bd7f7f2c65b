// Copyright 2026 The multimatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MULTIMATCH_CSV_HPP_
#define MULTIMATCH_CSV_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace multimatch {

// Minimal comma-separated table. Quoting is supported on read (RFC-4180
// style double quotes); fields are written unquoted, so cell values must
// not contain commas, quotes or newlines -- identifiers and numbers only.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, -1 if absent.
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const CsvTable& table, const std::string& path);
void write_csv(const CsvTable& table, std::ostream& out);

// Fixed-precision number formatting shared by all emitters so that
// identical runs produce byte-identical files.
std::string format_number(double value, int precision = 6);

}  // namespace multimatch

#endif  // MULTIMATCH_CSV_HPP_
