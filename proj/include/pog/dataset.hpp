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


#ifndef POG_DATASET_HPP
#define POG_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pog/grid.hpp"
#include "pog/scenario.hpp"

namespace pog {

struct DatasetSpec
{
    LayoutKind layout = LayoutKind::four_way_open;
    double extent_x = 40.0;
    double extent_y = 40.0;
    double lane_width = 3.5;
    double cell_size = 0.5;
    double t_pred = 1.0;
    std::size_t n_total = 10;
    double train_fraction = 0.7;
    std::uint64_t seed = 1;
    SamplerSettings sampler;

    void validate() const;
    RoadLayout road() const;
    /* POG geometry (one attribute per cell) */
    GridConfig grid() const;
};

struct DatasetRecord
{
    std::size_t id = 0;
    AugmentedOccupancyGrid aog;
    PredictedOccupancyGrid pog;
    QuantizedPog qpog;
};

struct Dataset
{
    GridConfig grid;              // POG geometry
    double t_pred = 0.0;
    std::string config_hash;
    std::vector<DatasetRecord> train;
    std::vector<DatasetRecord> validation;
};

/* round(n * fraction) */
std::size_t train_count(std::size_t n_total, double fraction);

/// Identifies what a predictor is compatible with: grid geometry and t_pred.
std::string grid_config_hash(const GridConfig& grid, double t_pred);

/// Samples n_total scenarios (scenario k seeded from (seed, k)), rasterizes
/// AOG / POG / quantized POG for each and writes them under dir/train and
/// dir/val plus dir/manifest.json. Returns the manifest path.
std::filesystem::path generate_dataset(const DatasetSpec& spec, const std::filesystem::path& dir);

/// Builds a validation-only dataset from scenario documents (see scenario_io.hpp).
std::filesystem::path import_scenarios(const std::vector<std::filesystem::path>& files,
                                       const GridConfig& grid, double t_pred,
                                       const std::filesystem::path& dir);

Dataset load_dataset(const std::filesystem::path& dir);

} // namespace pog

#endif // POG_DATASET_HPP
