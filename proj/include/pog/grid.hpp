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

#ifndef POG_GRID_HPP
#define POG_GRID_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pog {

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

/// Grid geometry. Cells are indexed (i, j) = (row, col) in row-major order.
/// Row i spans x in [origin.x + i * cell_length, origin.x + (i + 1) * cell_length)
/// and column j spans y in [origin.y + j * cell_width, ...), so rows advance
/// along the ego heading and columns to the ego's left.
struct GridConfig
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    double cell_length = 0.5;
    double cell_width = 0.5;
    Point2 origin;
    std::size_t attributes = 1;

    /* Throws std::invalid_argument when an invariant is violated */
    void validate() const;

    std::size_t cells() const { return rows * cols; }
    std::size_t values() const { return rows * cols * attributes; }
    std::size_t index(std::size_t i, std::size_t j) const { return i * cols + j; }

    Point2 cell_center(std::size_t i, std::size_t j) const
    {
        return {origin.x + (static_cast<double>(i) + 0.5) * cell_length,
                origin.y + (static_cast<double>(j) + 0.5) * cell_width};
    }

    double extent_x() const { return static_cast<double>(rows) * cell_length; }
    double extent_y() const { return static_cast<double>(cols) * cell_width; }

    /* Same geometry with a different attribute count */
    GridConfig with_attributes(std::size_t n) const;

    /* True when both configs describe the same cells (attribute count ignored) */
    bool same_geometry(const GridConfig& other) const;

    bool operator==(const GridConfig&) const = default;
};

/// Per-cell attribute layout of an augmented grid.
enum AogChannel : std::size_t {
    kOccupied = 0,
    kVelocity = 1,
    kOrientation = 2,
    kAccelLongitudinal = 3,
    kAccelLateral = 4,
};

/// Current traffic state: every cell carries
/// [occupied, velocity, orientation, longitudinal accel, lateral accel].
class AugmentedOccupancyGrid
{
public:
    static constexpr std::size_t kAttributes = 5;

    /* All-free grid */
    explicit AugmentedOccupancyGrid(const GridConfig& config);
    /* Validates dimensions, the 0/1 flag and the zero-attribute rule for free cells */
    AugmentedOccupancyGrid(const GridConfig& config, std::vector<double> values);

    const GridConfig& config() const { return mConfig; }
    std::span<const double> values() const { return mValues; }
    std::span<const double> cell(std::size_t i, std::size_t j) const;
    bool occupied(std::size_t i, std::size_t j) const { return cell(i, j)[kOccupied] != 0.0; }

private:
    GridConfig mConfig;
    std::vector<double> mValues;
};

/// Per-cell occupancy probability at one prediction instant.
class PredictedOccupancyGrid
{
public:
    explicit PredictedOccupancyGrid(const GridConfig& config, double t_pred = 0.0);
    /* Validates dimensions and that every probability lies in [0, 1] */
    PredictedOccupancyGrid(const GridConfig& config, double t_pred,
                           std::vector<double> probs);

    const GridConfig& config() const { return mConfig; }
    double t_pred() const { return mTPred; }
    std::span<const double> probs() const { return mProbs; }
    double at(std::size_t i, std::size_t j) const { return mProbs[mConfig.index(i, j)]; }

    bool operator==(const PredictedOccupancyGrid&) const = default;

private:
    GridConfig mConfig;
    double mTPred = 0.0;
    std::vector<double> mProbs;
};

/// The six occupancy levels {0, 0.2, ..., 1.0}.
inline constexpr std::array<double, 6> kQuantizedLevels = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
inline constexpr std::size_t kLevelCount = kQuantizedLevels.size();

/// Index into kQuantizedLevels. Doubles as the class label wherever a POG cell
/// is treated as a classification target.
struct QuantizedLevel
{
    std::uint8_t index = 0;

    double value() const { return kQuantizedLevels[index]; }
    auto operator<=>(const QuantizedLevel&) const = default;
};

/* Nearest multiple of 0.2, ties rounded up. Throws for p outside [0, 1] */
QuantizedLevel quantize_probability(double p);

/* Level whose value equals v exactly, if any */
std::optional<QuantizedLevel> level_of(double v);

/// POG whose cells hold one of the six levels.
class QuantizedPog
{
public:
    QuantizedPog(const GridConfig& config, double t_pred, std::vector<QuantizedLevel> levels);

    const GridConfig& config() const { return mConfig; }
    double t_pred() const { return mTPred; }
    std::span<const QuantizedLevel> levels() const { return mLevels; }
    QuantizedLevel at(std::size_t i, std::size_t j) const { return mLevels[mConfig.index(i, j)]; }

    /* Level values as a probability grid */
    PredictedOccupancyGrid to_pog() const;

    bool operator==(const QuantizedPog&) const = default;

private:
    GridConfig mConfig;
    double mTPred = 0.0;
    std::vector<QuantizedLevel> mLevels;
};

QuantizedPog quantize_pog(const PredictedOccupancyGrid& pog);

/// Reconstruction error of one sample. `rmse` divides by the component count
/// inside the root; `norm` is the plain Euclidean norm of the difference.
struct ReconstructionError
{
    double rmse = 0.0;
    double norm = 0.0;
};

ReconstructionError reconstruction_error(std::span<const double> reconstruction,
                                         std::span<const double> original);

inline double reconstruction_rmse(std::span<const double> reconstruction,
                                  std::span<const double> original)
{
    return reconstruction_error(reconstruction, original).rmse;
}

/// Non-zero cells of the ground truth (b) and estimate (d), as sorted flat
/// indices, plus k = |symmetric difference|.
struct OccupiedCellSets
{
    std::vector<std::size_t> b;
    std::vector<std::size_t> d;
    std::size_t k = 0;
};

OccupiedCellSets occupied_cell_sets(const PredictedOccupancyGrid& gt,
                                    const PredictedOccupancyGrid& est);

/// Squared error summed over every cell, normalized by k. When k is zero the
/// supports coincide and the sum is normalized by |b| instead (0 if b is empty).
double pog_error(const PredictedOccupancyGrid& gt, const PredictedOccupancyGrid& est);

enum class Band { low, mid, high };

/* Band of a ground-truth probability: [0, 0.2], (0.2, 0.7], (0.7, 1] */
Band band_of(double p);

struct BandValue
{
    std::optional<double> error;  // nullopt: no contributing cells
    std::size_t cells = 0;

    bool empty() const { return !error.has_value(); }
};

struct BandedError
{
    BandValue low;
    BandValue mid;
    BandValue high;

    const BandValue& operator[](Band b) const;
};

/// Error restricted to the cells whose ground-truth probability falls in each
/// band. Cells where both grids are zero are left out, so free space earns no
/// credit; k for a band is the number of its remaining cells.
BandedError banded_pog_error(const PredictedOccupancyGrid& gt,
                             const PredictedOccupancyGrid& est);

} // namespace pog

#endif // POG_GRID_HPP
