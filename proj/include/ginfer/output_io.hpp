/**
 * Copyright (c) 2026 The ginfer authors.
 *     All rights reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing,
 *  software distributed under the License is distributed on an "AS
 *  IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either
 *  express or implied.  See the License for the specific language
 *  governing permissions and limitations under the License.
 */

#ifndef GINFER_OUTPUT_IO_HPP
#define GINFER_OUTPUT_IO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ginfer/io_util.hpp"
#include "ginfer/node_id.hpp"
#include "ginfer/tensor.hpp"

namespace ginfer {

struct OutputRow {
  NodeId id;
  std::uint32_t predicted_class = 0;
  DenseVector logits;
};

// Rows are written sorted by id with shortest round-trip float formatting,
// so a fixed configuration produces byte-identical files.
inline void write_output_table(const std::vector<OutputRow>& rows,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output table " + path.string());
  for (const OutputRow& row : rows) {
    out << to_string(row.id) << '\t' << row.predicted_class << '\t'
        << format_float_list(row.logits) << '\n';
  }
}

inline std::vector<OutputRow> read_output_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open output table " + path.string());
  std::vector<OutputRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_view(line, '\t');
    if (fields.size() != 3) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 3 fields");
    }
    OutputRow row;
    const auto id = parse_node_id(fields[0]);
    if (!id) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad id");
    }
    row.id = *id;
    row.predicted_class = static_cast<std::uint32_t>(std::stoul(std::string(fields[1])));
    if (!parse_float_list(fields[2], row.logits)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad logit list");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ginfer

#endif  // GINFER_OUTPUT_IO_HPP
