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


#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pog/dataset.hpp"
#include "pog/errors.hpp"
#include "pog/pipelines.hpp"
#include "support.hpp"

namespace pog {
namespace {

namespace fs = std::filesystem;

constexpr std::array<Band, 3> kBands = {Band::low, Band::mid, Band::high};

// One small dataset shared by every test in this file.
class PipelineTest : public ::testing::Test
{
protected:
    static void SetUpTestSuite()
    {
        dir_ = new test::TempDir("pipelines");
        DatasetSpec s;
        s.extent_x = 12.0;
        s.extent_y = 12.0;
        s.cell_size = 1.0;
        s.n_total = 40;
        s.train_fraction = 0.75;
        s.seed = 5;
        s.sampler.position_range = 3.0;
        generate_dataset(s, dir_->path() / "data");
        data_ = new Dataset(load_dataset(dir_->path() / "data"));
    }

    static void TearDownTestSuite()
    {
        delete data_;
        delete dir_;
    }

    static SdaSpec small_sda(std::size_t code)
    {
        SdaSpec s;
        s.hidden = {48, code};
        s.train.epochs = 3;
        s.train.learning_rate = 1e-3;
        s.train.corruption.strength = 0.05;
        return s;
    }

    static ForestParams memorizing(std::size_t features)
    {
        ForestParams f;
        f.n_trees = 1;
        f.bootstrap = false;
        f.mtry = features;
        return f;
    }

    static const Dataset& data() { return *data_; }
    static const test::TempDir& dir() { return *dir_; }

private:
    static inline test::TempDir* dir_ = nullptr;
    static inline Dataset* data_ = nullptr;
};

bool is_level(double v)
{
    return std::any_of(kQuantizedLevels.begin(), kQuantizedLevels.end(),
                       [&](double l) { return l == v; });
}

TEST(Architecture, Names)
{
    for (auto id : {ArchitectureId::arch1, ArchitectureId::arch2, ArchitectureId::arch3}) {
        EXPECT_EQ(parse_architecture(to_string(id)), id);
    }
    EXPECT_THROW(parse_architecture("arch4"), std::invalid_argument);
    EXPECT_THROW(parse_architecture("ARCH1"), std::invalid_argument);
}

TEST_F(PipelineTest, Arch1WithMemorizingForestsReproducesTraining)
{
    Arch1Spec spec;
    spec.sda = small_sda(10);
    spec.forest = memorizing(10);
    const auto p = train_arch1(data(), spec);
    EXPECT_EQ(p.config_hash, data().config_hash);
    for (const auto& r : data().train) {
        EXPECT_EQ(predict(p, r.aog), r.qpog.to_pog()) << "record " << r.id;
    }
}

TEST_F(PipelineTest, OutputsAreValidPogs)
{
    Arch1Spec a1;
    a1.sda = small_sda(8);
    a1.forest.n_trees = 3;
    Arch2Spec a2;
    a2.sda_in = small_sda(8);
    a2.sda_out = small_sda(6);
    a2.forest.n_trees = 3;
    Arch3Spec a3;
    a3.train.epochs = 2;
    a3.train.arch.encoder_filters = 3;
    a3.train.arch.decoder_filters = 3;
    TrainingLog log;
    const auto p1 = train_arch1(data(), a1, &log);
    const auto p2 = train_arch2(data(), a2, &log, &*p1.sda_in);
    const auto p3 = train_arch3(data(), a3, &log);
    EXPECT_FALSE(log.empty());
    for (const auto& c : log) {
        EXPECT_FALSE(c.values.empty()) << c.name;
    }
    EXPECT_EQ(encode_sda(*p2.sda_in), encode_sda(*p1.sda_in));
    EXPECT_EQ(p2.latent_forests.size(), 6u);

    bool continuous = false;
    for (const auto& r : data().validation) {
        for (const auto* p : {&p1, &p2, &p3}) {
            const auto est = predict(*p, r.aog);
            ASSERT_TRUE(est.config().same_geometry(data().grid));
            for (double v : est.probs()) {
                ASSERT_GE(v, 0.0);
                ASSERT_LE(v, 1.0);
                if (p != &p2) {
                    ASSERT_TRUE(is_level(v)) << v;
                } else if (!is_level(v)) {
                    continuous = true;
                }
            }
        }
    }
    EXPECT_TRUE(continuous);
}

TEST_F(PipelineTest, PredictorRejectsForeignGrids)
{
    Arch3Spec a3;
    a3.train.epochs = 1;
    a3.train.arch.encoder_filters = 2;
    a3.train.arch.decoder_filters = 2;
    const auto p = train_arch3(data(), a3);
    const auto g = test::small_grid(5, 5).with_attributes(5);
    EXPECT_THROW(predict(p, AugmentedOccupancyGrid(g)), std::invalid_argument);
}

TEST_F(PipelineTest, BundlesRoundTrip)
{
    Arch1Spec a1;
    a1.sda = small_sda(8);
    a1.forest.n_trees = 2;
    Arch2Spec a2;
    a2.sda_in = small_sda(8);
    a2.sda_out = small_sda(5);
    a2.forest.n_trees = 2;
    a2.quantized_targets = true;
    Arch3Spec a3;
    a3.train.epochs = 1;
    a3.train.arch.encoder_filters = 2;
    a3.train.arch.decoder_filters = 2;
    const std::vector<TrainedPredictor> ps = {train_arch1(data(), a1), train_arch2(data(), a2),
                                              train_arch3(data(), a3)};
    for (const auto& p : ps) {
        const fs::path bundle = dir() / ("bundle_" + std::string(to_string(p.id)));
        save_predictor(p, bundle, R"({"note": 1})");
        const auto back = load_predictor(bundle);
        EXPECT_EQ(back.id, p.id);
        EXPECT_EQ(back.config_hash, p.config_hash);
        EXPECT_EQ(back.t_pred, p.t_pred);
        auto seeds = p.seeds;
        std::sort(seeds.begin(), seeds.end());
        EXPECT_EQ(back.seeds, seeds);
        for (const auto& r : data().validation) {
            EXPECT_EQ(predict(back, r.aog), predict(p, r.aog));
        }
    }
    EXPECT_THROW(load_predictor(dir() / "nowhere"), DataError);

    const fs::path broken = dir() / "bundle_arch3";
    for (const auto& e : fs::directory_iterator(broken)) {
        if (e.path().filename() != "manifest.json") {
            fs::resize_file(e.path(), fs::file_size(e.path()) / 2);
        }
    }
    EXPECT_THROW(load_predictor(broken), DataError);
}

TEST_F(PipelineTest, OracleAndEmptyBaselines)
{
    const auto report = evaluate({oracle_predictor(data()), empty_predictor(data())}, data());
    ASSERT_EQ(report.labels.size(), 2u);
    EXPECT_EQ(report.scenarios, data().validation.size());
    ASSERT_EQ(report.records.size(), 2 * data().validation.size());

    const auto& oracle = report.summary[0];
    for (Band b : kBands) {
        if (!oracle[b].empty()) {
            EXPECT_EQ(*oracle[b].error, 0.0);
        }
    }
    const auto& empty = report.summary[1];
    ASSERT_FALSE(empty.high.empty());
    EXPECT_GT(*empty.high.error, 0.7);
    EXPECT_LE(*empty.high.error, 1.0);
    // Free space is ignored, so the empty grid contributes no low-band cells of its own.
    for (const auto& r : report.records) {
        if (r.predictor == 1 && !r.error.low.empty()) {
            EXPECT_LE(*r.error.low.error, 0.2 + 1e-12);
        }
    }
}

TEST_F(PipelineTest, SummaryIsTheMeanOverPresentBands)
{
    const auto report = evaluate({oracle_predictor(data()), empty_predictor(data())}, data());
    for (std::size_t pi = 0; pi < 2; ++pi) {
        for (std::size_t b = 0; b < kBands.size(); ++b) {
            double sum = 0.0;
            std::size_t n = 0;
            std::size_t absent = 0;
            std::size_t last = 0;
            bool first = true;
            for (const auto& r : report.records) {
                if (r.predictor != pi) {
                    continue;
                }
                if (!first) {
                    EXPECT_GT(r.scenario, last);
                }
                first = false;
                last = r.scenario;
                const auto& v = r.error[kBands[b]];
                if (v.empty()) {
                    ++absent;
                } else {
                    sum += *v.error;
                    ++n;
                }
            }
            const auto& s = report.summary[pi][kBands[b]];
            EXPECT_EQ(report.empty_bands[pi][b], absent);
            EXPECT_EQ(s.cells, n);
            if (n == 0) {
                EXPECT_TRUE(s.empty());
            } else {
                EXPECT_NEAR(*s.error, sum / static_cast<double>(n), 1e-12);
            }
        }
    }
}

TEST_F(PipelineTest, EvaluationChecksTheConfigHash)
{
    auto foreign = oracle_predictor(data());
    foreign.config_hash = "0000000000000000";
    EXPECT_THROW(evaluate({foreign}, data()), DataError);
}

TEST_F(PipelineTest, ReportsAreWritten)
{
    const auto report = evaluate({oracle_predictor(data()), empty_predictor(data())}, data());
    const auto count_lines = [](const fs::path& p) {
        std::ifstream in(p);
        std::size_t n = 0;
        for (std::string line; std::getline(in, line);) {
            ++n;
        }
        return n;
    };
    write_records_csv(report, dir() / "records.csv");
    write_summary_csv(report, dir() / "summary.csv");
    write_histogram_csv(report, dir() / "histogram.csv");
    EXPECT_EQ(count_lines(dir() / "records.csv"), 1 + report.records.size());
    EXPECT_EQ(count_lines(dir() / "summary.csv"), 3u);
    EXPECT_EQ(count_lines(dir() / "histogram.csv"), 1 + report.histogram.size() + 2 * 3);

    // Per band, histogram counts plus empty rows add up to the scenario count.
    for (std::size_t pi = 0; pi < 2; ++pi) {
        for (std::size_t b = 0; b < kBands.size(); ++b) {
            std::size_t total = report.empty_bands[pi][b];
            for (const auto& h : report.histogram) {
                if (h.predictor == pi && h.band == kBands[b]) {
                    total += h.count;
                }
            }
            EXPECT_EQ(total, report.scenarios);
        }
    }
}

TEST_F(PipelineTest, DesignMatrices)
{
    const auto a = aog_matrix(data().train);
    const auto raw = pog_matrix(data().train);
    const auto q = pog_matrix(data().train, true);
    ASSERT_EQ(a.rows(), data().train.size());
    EXPECT_EQ(a.cols(), data().train[0].aog.values().size());
    for (std::size_t r = 0; r < raw.rows(); ++r) {
        const auto probs = data().train[r].pog.probs();
        const auto levels = data().train[r].qpog.to_pog();
        for (std::size_t c = 0; c < raw.cols(); ++c) {
            EXPECT_EQ(raw(r, c), probs[c]);
            EXPECT_EQ(q(r, c), levels.probs()[c]);
        }
    }
}

} // namespace
} // namespace pog
