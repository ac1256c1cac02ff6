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

#include "pog/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pog/errors.hpp"

namespace pog {

void GridConfig::validate() const
{
    require(rows >= 1, "grid rows must be >= 1");
    require(cols >= 1, "grid cols must be >= 1");
    require(cell_length > 0.0 && std::isfinite(cell_length), "cell_length must be > 0");
    require(cell_width > 0.0 && std::isfinite(cell_width), "cell_width must be > 0");
    require(attributes >= 1, "attributes per cell must be >= 1");
    require(std::isfinite(origin.x) && std::isfinite(origin.y), "grid origin must be finite");
}

GridConfig GridConfig::with_attributes(std::size_t n) const
{
    GridConfig c = *this;
    c.attributes = n;
    return c;
}

bool GridConfig::same_geometry(const GridConfig& other) const
{
    return rows == other.rows && cols == other.cols &&
           cell_length == other.cell_length && cell_width == other.cell_width &&
           origin.x == other.origin.x && origin.y == other.origin.y;
}

AugmentedOccupancyGrid::AugmentedOccupancyGrid(const GridConfig& config)
    : AugmentedOccupancyGrid(config,
                             std::vector<double>(config.cells() * kAttributes, 0.0))
{
}

AugmentedOccupancyGrid::AugmentedOccupancyGrid(const GridConfig& config,
                                               std::vector<double> values)
    : mConfig(config), mValues(std::move(values))
{
    mConfig.validate();
    require(mConfig.attributes == kAttributes,
            "augmented grid needs 5 attributes per cell, config has " +
                std::to_string(mConfig.attributes));
    require(mValues.size() == mConfig.values(), "augmented grid value count mismatch");
    for (std::size_t c = 0; c < mConfig.cells(); ++c) {
        const double* cell = mValues.data() + c * kAttributes;
        require(cell[kOccupied] == 0.0 || cell[kOccupied] == 1.0,
                "occupancy flag must be 0 or 1 (cell " + std::to_string(c) + ")");
        for (std::size_t a = 0; a < kAttributes; ++a) {
            require(std::isfinite(cell[a]), "non-finite attribute in cell " + std::to_string(c));
        }
        if (cell[kOccupied] == 0.0) {
            for (std::size_t a = 1; a < kAttributes; ++a) {
                require(cell[a] == 0.0,
                        "free cell " + std::to_string(c) + " carries non-zero attributes");
            }
        }
    }
}

std::span<const double> AugmentedOccupancyGrid::cell(std::size_t i, std::size_t j) const
{
    return std::span<const double>(mValues).subspan(mConfig.index(i, j) * kAttributes,
                                                    kAttributes);
}

PredictedOccupancyGrid::PredictedOccupancyGrid(const GridConfig& config, double t_pred)
    : PredictedOccupancyGrid(config, t_pred, std::vector<double>(config.cells(), 0.0))
{
}

PredictedOccupancyGrid::PredictedOccupancyGrid(const GridConfig& config, double t_pred,
                                               std::vector<double> probs)
    : mConfig(config), mTPred(t_pred), mProbs(std::move(probs))
{
    mConfig.validate();
    require(mConfig.attributes == 1, "predicted grid needs 1 attribute per cell");
    require(std::isfinite(t_pred) && t_pred >= 0.0, "t_pred must be finite and >= 0");
    require(mProbs.size() == mConfig.cells(), "predicted grid value count mismatch");
    for (std::size_t c = 0; c < mProbs.size(); ++c) {
        require(mProbs[c] >= 0.0 && mProbs[c] <= 1.0,
                "probability outside [0, 1] in cell " + std::to_string(c));
    }
}

QuantizedLevel quantize_probability(double p)
{
    require(p >= 0.0 && p <= 1.0, "probability to quantize must lie in [0, 1]");
    // 5p is rounded to the nearest double before the +0.5 tie rule, which
    // keeps decimal ties such as 0.3 or 0.7 on the upper level.
    const double idx = std::floor(p * 5.0 + 0.5);
    return QuantizedLevel{static_cast<std::uint8_t>(std::min(idx, 5.0))};
}

std::optional<QuantizedLevel> level_of(double v)
{
    for (std::size_t k = 0; k < kLevelCount; ++k) {
        if (kQuantizedLevels[k] == v) {
            return QuantizedLevel{static_cast<std::uint8_t>(k)};
        }
    }
    return std::nullopt;
}

QuantizedPog::QuantizedPog(const GridConfig& config, double t_pred,
                           std::vector<QuantizedLevel> levels)
    : mConfig(config), mTPred(t_pred), mLevels(std::move(levels))
{
    mConfig.validate();
    require(mConfig.attributes == 1, "quantized grid needs 1 attribute per cell");
    require(mLevels.size() == mConfig.cells(), "quantized grid value count mismatch");
    for (const auto& l : mLevels) {
        require(l.index < kLevelCount, "quantized level index out of range");
    }
}

PredictedOccupancyGrid QuantizedPog::to_pog() const
{
    std::vector<double> probs(mLevels.size());
    std::transform(mLevels.begin(), mLevels.end(), probs.begin(),
                   [](QuantizedLevel l) { return l.value(); });
    return PredictedOccupancyGrid(mConfig, mTPred, std::move(probs));
}

QuantizedPog quantize_pog(const PredictedOccupancyGrid& pog)
{
    std::vector<QuantizedLevel> levels(pog.probs().size());
    std::transform(pog.probs().begin(), pog.probs().end(), levels.begin(),
                   quantize_probability);
    return QuantizedPog(pog.config(), pog.t_pred(), std::move(levels));
}

ReconstructionError reconstruction_error(std::span<const double> reconstruction,
                                         std::span<const double> original)
{
    require(reconstruction.size() == original.size(),
            "reconstruction and original differ in length");
    require(!original.empty(), "reconstruction error needs at least one component");
    double sum = 0.0;
    for (std::size_t k = 0; k < original.size(); ++k) {
        const double d = reconstruction[k] - original[k];
        sum += d * d;
    }
    return {std::sqrt(sum / static_cast<double>(original.size())), std::sqrt(sum)};
}

namespace {

void require_same_grid(const PredictedOccupancyGrid& gt, const PredictedOccupancyGrid& est)
{
    require(gt.config() == est.config(), "ground truth and estimate use different grid configs");
}

} // namespace

OccupiedCellSets occupied_cell_sets(const PredictedOccupancyGrid& gt,
                                    const PredictedOccupancyGrid& est)
{
    require_same_grid(gt, est);
    OccupiedCellSets sets;
    const auto p = gt.probs();
    const auto q = est.probs();
    for (std::size_t c = 0; c < p.size(); ++c) {
        const bool in_b = p[c] > 0.0;
        const bool in_d = q[c] > 0.0;
        if (in_b) {
            sets.b.push_back(c);
        }
        if (in_d) {
            sets.d.push_back(c);
        }
        if (in_b != in_d) {
            ++sets.k;
        }
    }
    return sets;
}

double pog_error(const PredictedOccupancyGrid& gt, const PredictedOccupancyGrid& est)
{
    require_same_grid(gt, est);
    const auto p = gt.probs();
    const auto q = est.probs();
    double sum = 0.0;
    std::size_t k = 0;
    std::size_t b = 0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        const double d = q[c] - p[c];
        sum += d * d;
        const bool in_b = p[c] > 0.0;
        b += in_b ? 1 : 0;
        k += (in_b != (q[c] > 0.0)) ? 1 : 0;
    }
    if (k == 0) {
        if (b == 0) {
            return 0.0;
        }
        return std::sqrt(sum / static_cast<double>(b));
    }
    return std::sqrt(sum / static_cast<double>(k));
}

Band band_of(double p)
{
    if (p <= 0.2) {
        return Band::low;
    }
    if (p <= 0.7) {
        return Band::mid;
    }
    return Band::high;
}

const BandValue& BandedError::operator[](Band b) const
{
    switch (b) {
    case Band::low: return low;
    case Band::mid: return mid;
    case Band::high: return high;
    }
    return low;
}

BandedError banded_pog_error(const PredictedOccupancyGrid& gt,
                             const PredictedOccupancyGrid& est)
{
    require_same_grid(gt, est);
    const auto p = gt.probs();
    const auto q = est.probs();
    std::array<double, 3> sums{};
    std::array<std::size_t, 3> counts{};
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c] == 0.0 && q[c] == 0.0) {
            continue;
        }
        const auto band = static_cast<std::size_t>(band_of(p[c]));
        const double d = q[c] - p[c];
        sums[band] += d * d;
        ++counts[band];
    }
    auto value = [&](std::size_t band) {
        BandValue v;
        v.cells = counts[band];
        if (counts[band] > 0) {
            v.error = std::sqrt(sums[band] / static_cast<double>(counts[band]));
        }
        return v;
    };
    return BandedError{value(0), value(1), value(2)};
}

} // namespace pog
