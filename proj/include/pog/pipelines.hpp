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


#ifndef POG_PIPELINES_HPP
#define POG_PIPELINES_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

#include "pog/autoencoder.hpp"
#include "pog/dataset.hpp"
#include "pog/deconvnet.hpp"
#include "pog/forest.hpp"
#include "pog/grid.hpp"

namespace pog {

enum class ArchitectureId { arch1, arch2, arch3 };

std::string_view to_string(ArchitectureId id);
/* Accepts arch1|arch2|arch3; throws std::invalid_argument otherwise */
ArchitectureId parse_architecture(std::string_view s);

struct SdaSpec
{
    std::vector<std::size_t> hidden = {200, 80, 30};  // layer sizes after the input
    TrainSpec train;
};

/// SDA-1 on flattened AOGs, then one classification forest per POG cell.
struct Arch1Spec
{
    SdaSpec sda;
    ForestParams forest;
};

/// SDA-1 on AOGs, SDA-2 on POGs, one regression forest per SDA-2 code entry.
struct Arch2Spec
{
    SdaSpec sda_in;
    SdaSpec sda_out;
    ForestParams forest;
    bool quantized_targets = false;  // train SDA-2 on quantized instead of raw POGs
};

struct Arch3Spec
{
    ConvTrainSpec train;
    // Validation records whose loss is reported after each epoch; never trained on.
    std::size_t monitor_samples = 32;
};

struct TrainedPredictor
{
    ArchitectureId id = ArchitectureId::arch1;
    GridConfig grid;                 // POG geometry
    double t_pred = 0.0;
    std::string config_hash;
    std::optional<SdaModel> sda_in;             // arch1, arch2
    std::optional<CellForests> cell_forests;    // arch1
    std::vector<RandomForest> latent_forests;   // arch2
    std::optional<SdaModel> sda_out;            // arch2
    std::optional<ConvNetModel> convnet;        // arch3
    std::vector<std::pair<std::string, std::uint64_t>> seeds;  // recorded in the bundle manifest

    /* Component set matches id and all dimensions chain; throws std::invalid_argument */
    void validate() const;
};

struct LossCurve
{
    std::string name;
    std::vector<double> values;
};

/// Training-loss trajectories collected while a pipeline trains, in training order.
using TrainingLog = std::vector<LossCurve>;

/* Rows are flattened AOGs (HWC) */
Matrix aog_matrix(const std::vector<DatasetRecord>& records);
/* Rows are POG probability vectors (level values of the quantized POGs if `quantized`) */
Matrix pog_matrix(const std::vector<DatasetRecord>& records, bool quantized = false);

SdaModel train_sda(const Matrix& data, const SdaSpec& spec, const std::string& name,
                   TrainingLog* log = nullptr);

/// `pretrained_sda` skips SDA-1 training (it must fit the dataset's AOG size);
/// arch1 and arch2 can share one SDA-1 this way.
TrainedPredictor train_arch1(const Dataset& data, const Arch1Spec& spec,
                             TrainingLog* log = nullptr, const SdaModel* pretrained_sda = nullptr);
TrainedPredictor train_arch2(const Dataset& data, const Arch2Spec& spec,
                             TrainingLog* log = nullptr, const SdaModel* pretrained_sda = nullptr);
TrainedPredictor train_arch3(const Dataset& data, const Arch3Spec& spec,
                             TrainingLog* log = nullptr);

/// Arch I and III return level values of the argmax class, arch II the decoded
/// SDA-2 output clamped to [0, 1].
PredictedOccupancyGrid predict(const TrainedPredictor& predictor,
                               const AugmentedOccupancyGrid& aog);

/// Bundle directory: manifest.json plus one file per component. `run_config` is
/// an optional JSON document embedded verbatim under "run_config".
void save_predictor(const TrainedPredictor& predictor, const std::filesystem::path& dir,
                    const std::string& run_config = {});
TrainedPredictor load_predictor(const std::filesystem::path& dir);

/// Anything that maps a dataset record to a POG estimate. The config hash is
/// checked against the dataset's before evaluation.
struct PredictorRef
{
    std::string label;
    std::string config_hash;
    std::function<PredictedOccupancyGrid(const DatasetRecord&)> fn;
};

PredictorRef as_ref(const TrainedPredictor& predictor, std::string label = {});
/* Returns each record's own ground truth */
PredictorRef oracle_predictor(const Dataset& data);
/* Predicts an all-empty grid */
PredictorRef empty_predictor(const Dataset& data);

struct ScenarioErrorRecord
{
    std::size_t scenario = 0;
    std::size_t predictor = 0;                 // index into EvalReport::labels
    BandedError error;
    std::optional<double> latency_ms;
};

struct LatencyStats
{
    std::size_t calls = 0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

struct PredictorSummary
{
    std::string label;
    BandValue low;                              // mean over scenarios where the band is present
    BandValue mid;
    BandValue high;
    std::optional<LatencyStats> latency;

    const BandValue& operator[](Band b) const;
};

struct HistogramBin
{
    std::size_t predictor = 0;
    Band band = Band::low;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
};

struct EvalOptions
{
    std::size_t histogram_bins = 20;
    // Wall-clock timing is off by default so reports stay byte-reproducible.
    bool measure_latency = false;
    std::size_t latency_calls = 100;
};

struct EvalReport
{
    std::vector<std::string> labels;
    std::size_t scenarios = 0;
    std::vector<ScenarioErrorRecord> records;  // ordered by predictor, then scenario
    std::vector<PredictorSummary> summary;
    std::vector<HistogramBin> histogram;       // shared bin edges per band
    // Scenarios whose band had no contributing cells, per predictor and band.
    std::vector<std::array<std::size_t, 3>> empty_bands;
};

/// Banded errors of every predictor on the validation split. Throws DataError
/// when a predictor's config hash differs from the dataset's.
EvalReport evaluate(const std::vector<PredictorRef>& predictors, const Dataset& data,
                    const EvalOptions& options = {});

void write_records_csv(const EvalReport& report, const std::filesystem::path& path);
void write_summary_csv(const EvalReport& report, const std::filesystem::path& path);
void write_histogram_csv(const EvalReport& report, const std::filesystem::path& path);

struct ReferenceErrors
{
    std::string_view label;
    double low, mid, high;
};

/// Published validation-set errors of the three architectures at full scale,
/// kept as context for desk-scale reports.
inline constexpr std::array<ReferenceErrors, 3> kReferenceErrors = {{
    {"arch1", 0.0518, 0.0337, 0.0277},
    {"arch2", 0.0742, 0.0739, 0.0501},
    {"arch3", 0.1501, 0.1447, 0.0777},
}};

} // namespace pog

#endif // POG_PIPELINES_HPP
