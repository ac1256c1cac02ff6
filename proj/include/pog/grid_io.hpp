// Copyright 2026 The pogest Authors
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

#ifndef POG_GRID_IO_HPP
#define POG_GRID_IO_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pog/grid.hpp"

namespace pog::io {

/// Grid binary file:
///   "POGG" | u16 version | u32 rows | u32 cols | u32 attributes | f32 t_pred
///   | rows*cols*attributes f32 values (row-major, attribute-minor)
/// All integers and floats little-endian. The file carries no cell size or
/// origin; readers attach geometry from the dataset manifest.
inline constexpr std::uint16_t kGridFormatVersion = 1;

struct GridFile
{
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t attributes = 0;
    float t_pred = 0.0f;
    std::vector<double> values;  // widened from f32
};

std::vector<std::uint8_t> encode_grid(const GridFile& grid);
GridFile decode_grid(std::vector<std::uint8_t> bytes, const std::string& source = "<memory>");

void write_grid(const std::filesystem::path& path, const GridFile& grid);
/* Throws DataError with the byte offset of the first malformed field */
GridFile read_grid(const std::filesystem::path& path);

GridFile to_file(const AugmentedOccupancyGrid& aog);
GridFile to_file(const PredictedOccupancyGrid& pog);
GridFile to_file(const QuantizedPog& pog);

/* `geometry` supplies cell size and origin; rows/cols/attributes must match the file */
AugmentedOccupancyGrid to_aog(const GridFile& file, const GridConfig& geometry);
PredictedOccupancyGrid to_pog(const GridFile& file, const GridConfig& geometry);
QuantizedPog to_quantized_pog(const GridFile& file, const GridConfig& geometry);

} // namespace pog::io

#endif // POG_GRID_IO_HPP
