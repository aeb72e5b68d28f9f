/* Copyright 2026 The rpsense Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <rpsense/io/config.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace rpsense {


/// Shortest round-trip-safe text for a double: 17 significant digits.
inline std::string format_double(double x) { return detail::fmt17(x); }

/// Comment lines that open every output file.
inline std::string provenance_header(const RunConfig& c, const std::string& command) {
  std::ostringstream os;
  os << "# rpsense " << kVersion << " command=" << command << " config_hash=" << config_hash(c)
     << " seed=" << c.seed << '\n';
  return os.str();
}

/// Buffers a table and writes it in one go.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  /// One cell; numbers are formatted with format_double.
  struct Cell {
    std::string text;
    Cell(double x) : text(format_double(x)) {}                 // NOLINT
    Cell(int x) : text(std::to_string(x)) {}                   // NOLINT
    Cell(std::uint64_t x) : text(std::to_string(x)) {}         // NOLINT
    Cell(std::string s) : text(std::move(s)) {}                // NOLINT
    Cell(const char* s) : text(s) {}                           // NOLINT
  };

  void add(std::vector<Cell> cells) {
    if (cells.size() != columns_.size()) throw Error("csv row has the wrong number of cells");
    std::vector<std::string> r;
    for (auto& c : cells) r.push_back(std::move(c.text));
    rows_.push_back(std::move(r));
  }

  std::size_t size() const { return rows_.size(); }

  std::string str(const std::string& header) const {
    std::ostringstream os;
    os << header;
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    return os.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace rpsense
