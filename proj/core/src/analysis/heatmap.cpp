// Copyright 2026 The tgpd Authors. All rights reserved.
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

#include "tgpd/analysis/heatmap.hpp"

#include <cmath>

#include "tgpd/common/binary_io.hpp"

namespace tgpd::analysis {

HeatMap to_heatmap(const nn::Tensor<double>& raw) {
  HeatMap map;
  map.raw = raw;
  map.rows = raw.rows();
  map.cols = raw.cols();
  double peak = 0.0;
  for (double v : raw.values()) {
    if (!std::isfinite(v)) throw NumericError("heat map input has non-finite entries");
    peak = std::max(peak, std::abs(v));
  }
  if (peak == 0.0) throw NumericError("heat map input is all zero");
  map.scaled.reserve(raw.size());
  for (double v : raw.values()) {
    map.scaled.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::abs(v) / peak)));
  }
  return map;
}

double heatmap_mean_abs_diff(const HeatMap& a, const HeatMap& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeError("heat maps differ in size: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " vs " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
  if (a.scaled.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < a.scaled.size(); ++i) {
    total += std::abs(static_cast<int>(a.scaled[i]) - static_cast<int>(b.scaled[i]));
  }
  return total / static_cast<double>(a.scaled.size());
}

std::string encode_pgm(const HeatMap& map) {
  std::string out = "P5\n" + std::to_string(map.cols) + " " + std::to_string(map.rows) + "\n255\n";
  out.append(map.scaled.begin(), map.scaled.end());
  return out;
}

std::string heatmap_csv(const HeatMap& map) {
  std::string out;
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (c) out += ',';
      out += std::to_string(map.at(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_heatmap(const HeatMap& map, const std::filesystem::path& pgm_path,
                   const std::filesystem::path& csv_path) {
  write_file_atomic(pgm_path, encode_pgm(map));
  write_file_atomic(csv_path, heatmap_csv(map));
}

}  // namespace tgpd::analysis
