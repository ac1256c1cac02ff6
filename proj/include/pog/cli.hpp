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


#ifndef POG_CLI_HPP
#define POG_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pog/dataset.hpp"
#include "pog/grid_io.hpp"
#include "pog/pipelines.hpp"

namespace pog::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

struct Paths
{
    std::filesystem::path dataset = "data";
    std::filesystem::path output = "runs";
};

/// Everything a run depends on. Serialized into every manifest a command writes.
struct RunConfig
{
    DatasetSpec dataset;
    Arch1Spec arch1;
    Arch2Spec arch2;
    Arch3Spec arch3;
    Paths paths;

    /* Throws std::invalid_argument naming the offending field */
    void validate() const;
};

/* 20x20 grid of 1 m cells, 2000 train / 500 validation scenarios, reduced model sizes */
RunConfig desk_config();
/* 80x80 grid of 0.5 m cells, 33280 scenarios and the published layer sizes */
RunConfig paper_config();

/// JSON document overlaid on `base`: absent fields keep their value, unknown
/// fields are rejected. Throws DataError naming the source and field.
RunConfig parse_run_config(const std::string& text, const std::string& source,
                           const RunConfig& base = desk_config());
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = desk_config());
/// Applies one "dotted.path=value" override, e.g. "dataset.n_total=10". The
/// value is read as JSON when it parses, otherwise as a string.
RunConfig apply_override(const RunConfig& config, const std::string& assignment);

/* Canonical JSON of every field */
std::string dump_run_config(const RunConfig& config);

/* Samples the configured dataset; prints and returns the manifest path */
std::filesystem::path cmd_generate(const RunConfig& config, std::ostream& out);
/* Rasterizes scenario documents into a validation-only dataset at paths.dataset */
std::filesystem::path cmd_import(const RunConfig& config,
                                 const std::vector<std::filesystem::path>& scenarios,
                                 std::ostream& out);

/// Trains one architecture on the dataset at paths.dataset and writes the
/// bundle to `bundle_dir`. Prints the loss trajectories.
void cmd_train(const RunConfig& config, ArchitectureId arch,
               const std::filesystem::path& bundle_dir, std::ostream& out);

/* Predicts the POG of one AOG grid file and writes it as a grid file */
void cmd_predict(const std::filesystem::path& bundle_dir, const std::filesystem::path& aog_file,
                 const std::filesystem::path& out_file, std::ostream& out);

/// Evaluates bundles on the validation split of paths.dataset and writes
/// records.csv, summary.csv, histogram.csv and manifest.json to `out_dir`.
EvalReport cmd_eval(const RunConfig& config, const std::vector<std::filesystem::path>& bundles,
                    const std::filesystem::path& out_dir, const EvalOptions& options,
                    std::ostream& out);

/// 8-bit binary PGM of a grid file: round(255 p) per cell for POGs, the
/// occupancy flag for AOGs. Image rows follow grid rows.
void cmd_render(const std::filesystem::path& grid_file, const std::filesystem::path& image_file);

/* Grayscale bytes of a grid file, rows x cols */
std::vector<std::uint8_t> render_pixels(const io::GridFile& grid);

/* POG_THREADS when set, else the OpenMP default */
int default_thread_count();

} // namespace pog::cli

#endif // POG_CLI_HPP
