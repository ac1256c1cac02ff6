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

#include "pog/grid_io.hpp"

#include <cmath>
#include <string>

#include "pog/binary_io.hpp"
#include "pog/errors.hpp"

namespace pog::io {

std::vector<std::uint8_t> encode_grid(const GridFile& grid)
{
    const std::size_t expected = static_cast<std::size_t>(grid.rows) * grid.cols * grid.attributes;
    require(grid.values.size() == expected, "grid value count does not match its header");
    ByteWriter w;
    w.bytes("POGG");
    w.u16(kGridFormatVersion);
    w.u32(grid.rows);
    w.u32(grid.cols);
    w.u32(grid.attributes);
    w.f32(grid.t_pred);
    w.f32_array(grid.values);
    return w.data();
}

GridFile decode_grid(std::vector<std::uint8_t> bytes, const std::string& source)
{
    ByteReader r(std::move(bytes), source);
    r.expect_magic("POGG");
    const std::size_t version_at = r.offset();
    const auto version = r.u16();
    if (version != kGridFormatVersion) {
        r.fail("unsupported grid format version " + std::to_string(version) +
               " (field at offset " + std::to_string(version_at) + ")");
    }
    GridFile g;
    g.rows = r.u32();
    g.cols = r.u32();
    g.attributes = r.u32();
    if (g.rows == 0 || g.cols == 0 || g.attributes == 0) {
        r.fail("grid header has a zero dimension");
    }
    g.t_pred = r.f32();
    if (!std::isfinite(g.t_pred)) {
        r.fail("non-finite t_pred");
    }
    const std::size_t count = static_cast<std::size_t>(g.rows) * g.cols * g.attributes;
    g.values = r.f32_array(count);
    r.expect_end();
    return g;
}

void write_grid(const std::filesystem::path& path, const GridFile& grid)
{
    io::write_file_bytes(path, encode_grid(grid));
}

GridFile read_grid(const std::filesystem::path& path)
{
    return decode_grid(read_file_bytes(path), path.string());
}

GridFile to_file(const AugmentedOccupancyGrid& aog)
{
    const auto& c = aog.config();
    return GridFile{static_cast<std::uint32_t>(c.rows), static_cast<std::uint32_t>(c.cols),
                    static_cast<std::uint32_t>(AugmentedOccupancyGrid::kAttributes), 0.0f,
                    std::vector<double>(aog.values().begin(), aog.values().end())};
}

GridFile to_file(const PredictedOccupancyGrid& pog)
{
    const auto& c = pog.config();
    return GridFile{static_cast<std::uint32_t>(c.rows), static_cast<std::uint32_t>(c.cols), 1u,
                    static_cast<float>(pog.t_pred()),
                    std::vector<double>(pog.probs().begin(), pog.probs().end())};
}

GridFile to_file(const QuantizedPog& pog)
{
    return to_file(pog.to_pog());
}

namespace {

void check_dims(const GridFile& file, const GridConfig& geometry, std::size_t attributes)
{
    if (file.rows != geometry.rows || file.cols != geometry.cols ||
        file.attributes != attributes) {
        throw DataError("grid file is " + std::to_string(file.rows) + "x" +
                        std::to_string(file.cols) + "x" + std::to_string(file.attributes) +
                        ", expected " + std::to_string(geometry.rows) + "x" +
                        std::to_string(geometry.cols) + "x" + std::to_string(attributes));
    }
}

} // namespace

AugmentedOccupancyGrid to_aog(const GridFile& file, const GridConfig& geometry)
{
    check_dims(file, geometry, AugmentedOccupancyGrid::kAttributes);
    try {
        return AugmentedOccupancyGrid(geometry.with_attributes(AugmentedOccupancyGrid::kAttributes),
                                      file.values);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("invalid augmented grid: ") + e.what());
    }
}

PredictedOccupancyGrid to_pog(const GridFile& file, const GridConfig& geometry)
{
    check_dims(file, geometry, 1);
    try {
        return PredictedOccupancyGrid(geometry.with_attributes(1), file.t_pred, file.values);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("invalid predicted grid: ") + e.what());
    }
}

QuantizedPog to_quantized_pog(const GridFile& file, const GridConfig& geometry)
{
    check_dims(file, geometry, 1);
    std::vector<QuantizedLevel> levels(file.values.size());
    for (std::size_t c = 0; c < levels.size(); ++c) {
        // Levels are stored as f32; 0.2 etc. do not survive exactly, so snap.
        const double v = file.values[c];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DataError("quantized grid value outside [0, 1] in cell " + std::to_string(c));
        }
        const auto level = quantize_probability(v);
        if (std::abs(level.value() - v) > 1e-6) {
            throw DataError("cell " + std::to_string(c) + " is not a quantized level");
        }
        levels[c] = level;
    }
    return QuantizedPog(geometry.with_attributes(1), file.t_pred, std::move(levels));
}

} // namespace pog::io
