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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tgpd/nn/tensor.hpp"

namespace tgpd::analysis {

struct HeatMap {
  nn::Tensor<double> raw;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> scaled;  // row-major

  std::uint8_t at(std::size_t r, std::size_t c) const { return scaled[r * cols + c]; }
};

// scaled = round(255 * |raw| / max|raw|). Throws NumericError when raw is
// all zero.
HeatMap to_heatmap(const nn::Tensor<double>& raw);

// Mean of |a - b| over entries, in 0-255 units.
double heatmap_mean_abs_diff(const HeatMap& a, const HeatMap& b);

// Binary 8-bit grayscale (P5).
std::string encode_pgm(const HeatMap& map);
std::string heatmap_csv(const HeatMap& map);
void write_heatmap(const HeatMap& map, const std::filesystem::path& pgm_path,
                   const std::filesystem::path& csv_path);

}  // namespace tgpd::analysis
