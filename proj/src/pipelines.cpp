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


#include "pog/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pog/errors.hpp"

namespace pog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kBundleVersion = 1;
constexpr const char* kSdaInFile = "sda_in.pogs";
constexpr const char* kSdaOutFile = "sda_out.pogs";
constexpr const char* kCellForestFile = "cell_forests.pgcf";
constexpr const char* kLatentForestFile = "latent_forests.pgfl";
constexpr const char* kConvNetFile = "convnet.pogc";

template <typename F>
void parallel_units(std::size_t n, F&& body)
{
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long kl = 0; kl < static_cast<long>(n); ++kl) {
        try {
            body(static_cast<std::size_t>(kl));
        } catch (...) {
            errors[static_cast<std::size_t>(kl)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

void require_training_data(const Dataset& data)
{
    require(!data.train.empty(), "training split is empty");
}

std::vector<QuantizedPog> target_levels(const std::vector<DatasetRecord>& records)
{
    std::vector<QuantizedPog> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.qpog);
    }
    return out;
}

SdaModel sda_for(const Matrix& aogs, const SdaSpec& spec, const SdaModel* pretrained,
                 TrainingLog* log)
{
    if (pretrained == nullptr) {
        return train_sda(aogs, spec, "sda_in", log);
    }
    pretrained->validate();
    require(pretrained->input_dim() == aogs.cols(),
            "pretrained SDA input size does not match the AOG size");
    return *pretrained;
}

void check_aog(const TrainedPredictor& p, const AugmentedOccupancyGrid& aog)
{
    require(aog.config().same_geometry(p.grid), "AOG grid does not match the predictor grid");
}

json grid_json(const GridConfig& g)
{
    return {{"rows", g.rows},
            {"cols", g.cols},
            {"cell_length", g.cell_length},
            {"cell_width", g.cell_width},
            {"origin", {g.origin.x, g.origin.y}}};
}

GridConfig grid_from_json(const json& j)
{
    GridConfig g;
    g.rows = j.at("rows").get<std::size_t>();
    g.cols = j.at("cols").get<std::size_t>();
    g.cell_length = j.at("cell_length").get<double>();
    g.cell_width = j.at("cell_width").get<double>();
    const auto o = j.at("origin").get<std::array<double, 2>>();
    g.origin = {o[0], o[1]};
    g.validate();
    return g;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt(const BandValue& v) { return v.error ? fmt(*v.error) : std::string(); }

std::ofstream open_csv(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

void close_csv(std::ofstream& out, const fs::path& path)
{
    out.close();
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
}

constexpr std::array<Band, 3> kBands = {Band::low, Band::mid, Band::high};

std::string_view band_name(Band b)
{
    switch (b) {
    case Band::low: return "low";
    case Band::mid: return "mid";
    case Band::high: return "high";
    }
    return "?";
}

} // namespace

std::string_view to_string(ArchitectureId id)
{
    switch (id) {
    case ArchitectureId::arch1: return "arch1";
    case ArchitectureId::arch2: return "arch2";
    case ArchitectureId::arch3: return "arch3";
    }
    return "?";
}

ArchitectureId parse_architecture(std::string_view s)
{
    for (const auto id : {ArchitectureId::arch1, ArchitectureId::arch2, ArchitectureId::arch3}) {
        if (s == to_string(id)) {
            return id;
        }
    }
    throw std::invalid_argument("unknown architecture '" + std::string(s) +
                                "' (expected arch1, arch2 or arch3)");
}

void TrainedPredictor::validate() const
{
    grid.validate();
    require(grid.attributes == 1, "predictor grid must describe a POG");
    const std::size_t aog_dim = grid.cells() * AugmentedOccupancyGrid::kAttributes;
    const bool sda_ok = sda_in.has_value();
    switch (id) {
    case ArchitectureId::arch1:
        require(sda_ok && cell_forests && !sda_out && !convnet && latent_forests.empty(),
                "arch1 needs exactly an SDA and a grid of forests");
        sda_in->validate();
        require(sda_in->input_dim() == aog_dim, "SDA-1 input does not match the AOG size");
        require(cell_forests->grid.same_geometry(grid), "forest grid does not match");
        require(cell_forests->forests.size() == grid.cells(), "one forest per cell expected");
        for (const auto& f : cell_forests->forests) {
            require(f.task == ForestTask::classification && f.n_features == sda_in->code_dim(),
                    "cell forest does not fit the SDA-1 code");
        }
        break;
    case ArchitectureId::arch2:
        require(sda_ok && sda_out && !cell_forests && !convnet && !latent_forests.empty(),
                "arch2 needs two SDAs and a list of forests");
        sda_in->validate();
        sda_out->validate();
        require(sda_in->input_dim() == aog_dim, "SDA-1 input does not match the AOG size");
        require(sda_out->input_dim() == grid.cells(), "SDA-2 input does not match the POG size");
        require(latent_forests.size() == sda_out->code_dim(),
                "one forest per SDA-2 code entry expected");
        for (const auto& f : latent_forests) {
            require(f.task == ForestTask::regression && f.n_features == sda_in->code_dim(),
                    "latent forest does not fit the SDA-1 code");
        }
        break;
    case ArchitectureId::arch3:
        require(convnet && !sda_ok && !sda_out && !cell_forests && latent_forests.empty(),
                "arch3 needs exactly a convnet");
        convnet->validate();
        require(convnet->rows == grid.rows && convnet->cols == grid.cols &&
                    convnet->in_channels == AugmentedOccupancyGrid::kAttributes &&
                    convnet->classes == kLevelCount,
                "convnet shape does not match the grid");
        break;
    }
}

Matrix aog_matrix(const std::vector<DatasetRecord>& records)
{
    require(!records.empty(), "no records");
    const std::size_t dim = records.front().aog.values().size();
    Matrix m(records.size(), dim);
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto v = records[r].aog.values();
        require(v.size() == dim, "records have different AOG sizes");
        std::copy(v.begin(), v.end(), m.row(r).begin());
    }
    return m;
}

Matrix pog_matrix(const std::vector<DatasetRecord>& records, bool quantized)
{
    require(!records.empty(), "no records");
    const std::size_t dim = records.front().pog.probs().size();
    Matrix m(records.size(), dim);
    for (std::size_t r = 0; r < records.size(); ++r) {
        require(records[r].pog.probs().size() == dim, "records have different POG sizes");
        auto row = m.row(r);
        if (quantized) {
            const auto levels = records[r].qpog.levels();
            for (std::size_t k = 0; k < dim; ++k) {
                row[k] = levels[k].value();
            }
        } else {
            const auto v = records[r].pog.probs();
            std::copy(v.begin(), v.end(), row.begin());
        }
    }
    return m;
}

SdaModel train_sda(const Matrix& data, const SdaSpec& spec, const std::string& name,
                   TrainingLog* log)
{
    require(!spec.hidden.empty(), "SDA needs at least one hidden layer");
    std::vector<std::size_t> sizes = {data.cols()};
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    std::vector<TrainLog> logs;
    SdaModel model = train_stack(data, sizes, spec.train, &logs);
    if (log != nullptr) {
        for (std::size_t l = 0; l < logs.size(); ++l) {
            log->push_back({name + ".layer" + std::to_string(l + 1), logs[l].epoch_loss});
        }
    }
    return model;
}

TrainedPredictor train_arch1(const Dataset& data, const Arch1Spec& spec, TrainingLog* log,
                             const SdaModel* pretrained_sda)
{
    require_training_data(data);
    const Matrix aogs = aog_matrix(data.train);
    TrainedPredictor p;
    p.id = ArchitectureId::arch1;
    p.grid = data.grid;
    p.t_pred = data.t_pred;
    p.config_hash = data.config_hash;
    p.sda_in = sda_for(aogs, spec.sda, pretrained_sda, log);
    const Matrix codes = encode_stack(*p.sda_in, aogs);
    p.cell_forests = train_percell_forests(codes, target_levels(data.train), spec.forest);
    p.cell_forests->grid = data.grid;
    p.seeds = {{"sda_in", spec.sda.train.rng_seed}, {"forests", spec.forest.rng_seed}};
    p.validate();
    return p;
}

TrainedPredictor train_arch2(const Dataset& data, const Arch2Spec& spec, TrainingLog* log,
                             const SdaModel* pretrained_sda)
{
    require_training_data(data);
    const Matrix aogs = aog_matrix(data.train);
    const Matrix pogs = pog_matrix(data.train, spec.quantized_targets);
    TrainedPredictor p;
    p.id = ArchitectureId::arch2;
    p.grid = data.grid;
    p.t_pred = data.t_pred;
    p.config_hash = data.config_hash;
    p.sda_in = sda_for(aogs, spec.sda_in, pretrained_sda, log);
    p.sda_out = train_sda(pogs, spec.sda_out, "sda_out", log);
    const Matrix codes_in = encode_stack(*p.sda_in, aogs);
    const Matrix codes_out = encode_stack(*p.sda_out, pogs);
    p.latent_forests = train_perlatent_forests(codes_in, codes_out, spec.forest);
    p.seeds = {{"sda_in", spec.sda_in.train.rng_seed},
               {"sda_out", spec.sda_out.train.rng_seed},
               {"forests", spec.forest.rng_seed}};
    p.validate();
    return p;
}

TrainedPredictor train_arch3(const Dataset& data, const Arch3Spec& spec, TrainingLog* log)
{
    require_training_data(data);
    std::vector<ConvSample> samples;
    samples.reserve(data.train.size());
    for (const auto& r : data.train) {
        samples.push_back(make_sample(r.aog, r.qpog));
    }
    std::vector<ConvSample> monitor;
    for (std::size_t k = 0; k < std::min(spec.monitor_samples, data.validation.size()); ++k) {
        monitor.push_back(make_sample(data.validation[k].aog, data.validation[k].qpog));
    }
    ConvTrainLog tl;
    TrainedPredictor p;
    p.id = ArchitectureId::arch3;
    p.grid = data.grid;
    p.t_pred = data.t_pred;
    p.config_hash = data.config_hash;
    p.convnet = train_convnet(samples, data.grid.rows, data.grid.cols, spec.train, monitor, &tl);
    p.seeds = {{"convnet", spec.train.rng_seed}};
    if (log != nullptr) {
        log->push_back({"convnet.train", tl.epoch_loss});
        if (!tl.holdout_loss.empty()) {
            log->push_back({"convnet.monitor", tl.holdout_loss});
        }
    }
    p.validate();
    return p;
}

PredictedOccupancyGrid predict(const TrainedPredictor& p, const AugmentedOccupancyGrid& aog)
{
    check_aog(p, aog);
    switch (p.id) {
    case ArchitectureId::arch1: {
        const auto code = encode_stack(*p.sda_in, aog.values());
        return p.cell_forests->predict(code, p.t_pred).to_pog();
    }
    case ArchitectureId::arch2: {
        const auto code = encode_stack(*p.sda_in, aog.values());
        auto probs = decode_stack(*p.sda_out, predict_latents(p.latent_forests, code));
        for (double& v : probs) {
            v = std::clamp(v, 0.0, 1.0);
        }
        return PredictedOccupancyGrid(p.grid, p.t_pred, std::move(probs));
    }
    case ArchitectureId::arch3:
        return predict_pog(*p.convnet, aog, p.t_pred).to_pog();
    }
    throw std::invalid_argument("unknown architecture");
}

void save_predictor(const TrainedPredictor& p, const fs::path& dir, const std::string& run_config)
{
    p.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DataError("cannot create bundle directory " + dir.string());
    }
    json components = json::object();
    json dims = json::object();
    if (p.sda_in) {
        save_sda(*p.sda_in, dir / kSdaInFile);
        components["sda_in"] = kSdaInFile;
        dims["sda_in"] = p.sda_in->layer_sizes();
    }
    if (p.cell_forests) {
        save_cell_forests(*p.cell_forests, dir / kCellForestFile);
        components["cell_forests"] = kCellForestFile;
        dims["cell_forests"] = p.cell_forests->forests.size();
    }
    if (!p.latent_forests.empty()) {
        save_forest_list(p.latent_forests, dir / kLatentForestFile);
        components["latent_forests"] = kLatentForestFile;
        dims["latent_forests"] = p.latent_forests.size();
    }
    if (p.sda_out) {
        save_sda(*p.sda_out, dir / kSdaOutFile);
        components["sda_out"] = kSdaOutFile;
        dims["sda_out"] = p.sda_out->layer_sizes();
    }
    if (p.convnet) {
        save_convnet(*p.convnet, dir / kConvNetFile);
        components["convnet"] = kConvNetFile;
        const auto& m = *p.convnet;
        dims["convnet"] = {{"input", {m.rows, m.cols, m.in_channels}},
                           {"conv1", m.conv1.shape.out_channels},
                           {"conv2", m.conv2.shape.out_channels},
                           {"fc", m.fc.weights.rows()},
                           {"deconv1", m.deconv1.shape.in_channels},
                           {"classes", m.classes}};
    }
    json seeds = json::object();
    for (const auto& [name, seed] : p.seeds) {
        seeds[name] = seed;
    }
    json manifest = {{"version", kBundleVersion},
                     {"architecture", std::string(to_string(p.id))},
                     {"config_hash", p.config_hash},
                     {"grid", grid_json(p.grid)},
                     {"t_pred", p.t_pred},
                     {"components", components},
                     {"dims", dims},
                     {"seeds", seeds}};
    if (!run_config.empty()) {
        try {
            manifest["run_config"] = json::parse(run_config);
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("run config is not valid JSON: ") + e.what());
        }
    }
    const fs::path path = dir / "manifest.json";
    std::ofstream out(path);
    out << manifest.dump(2) << "\n";
    out.close();
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
}

TrainedPredictor load_predictor(const fs::path& dir)
{
    const fs::path path = dir / "manifest.json";
    std::ifstream in(path);
    if (!in) {
        throw DataError("predictor manifest not found: " + path.string());
    }
    TrainedPredictor p;
    json components;
    try {
        const json manifest = json::parse(in);
        if (manifest.at("version").get<int>() != kBundleVersion) {
            throw DataError(path.string() + ": unsupported bundle version");
        }
        p.id = parse_architecture(manifest.at("architecture").get<std::string>());
        p.config_hash = manifest.at("config_hash").get<std::string>();
        p.grid = grid_from_json(manifest.at("grid"));
        p.t_pred = manifest.at("t_pred").get<double>();
        components = manifest.at("components");
        for (const auto& [name, seed] : manifest.at("seeds").items()) {
            p.seeds.emplace_back(name, seed.get<std::uint64_t>());
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    const auto file = [&](const char* key) {
        return dir / components.at(key).get<std::string>();
    };
    if (components.contains("sda_in")) {
        p.sda_in = load_sda(file("sda_in"));
    }
    if (components.contains("cell_forests")) {
        p.cell_forests = load_cell_forests(file("cell_forests"));
    }
    if (components.contains("latent_forests")) {
        p.latent_forests = load_forest_list(file("latent_forests"));
    }
    if (components.contains("sda_out")) {
        p.sda_out = load_sda(file("sda_out"));
    }
    if (components.contains("convnet")) {
        p.convnet = load_convnet(file("convnet"));
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(dir.string() + ": inconsistent bundle: " + e.what());
    }
    return p;
}

PredictorRef as_ref(const TrainedPredictor& predictor, std::string label)
{
    if (label.empty()) {
        label = std::string(to_string(predictor.id));
    }
    return {std::move(label), predictor.config_hash,
            [&predictor](const DatasetRecord& r) { return predict(predictor, r.aog); }};
}

PredictorRef oracle_predictor(const Dataset& data)
{
    return {"oracle", data.config_hash, [](const DatasetRecord& r) { return r.pog; }};
}

PredictorRef empty_predictor(const Dataset& data)
{
    return {"empty", data.config_hash, [grid = data.grid, t = data.t_pred](const DatasetRecord&) {
                return PredictedOccupancyGrid(grid, t);
            }};
}

const BandValue& PredictorSummary::operator[](Band b) const
{
    switch (b) {
    case Band::low: return low;
    case Band::mid: return mid;
    case Band::high: return high;
    }
    return low;
}

EvalReport evaluate(const std::vector<PredictorRef>& predictors, const Dataset& data,
                    const EvalOptions& options)
{
    require(!predictors.empty(), "nothing to evaluate");
    require(!data.validation.empty(), "validation split is empty");
    require(options.histogram_bins >= 1, "histogram needs at least one bin");
    for (const auto& p : predictors) {
        if (p.config_hash != data.config_hash) {
            throw DataError("predictor '" + p.label + "' was trained for config " +
                            p.config_hash + " but the dataset has config " + data.config_hash);
        }
    }
    const auto& val = data.validation;
    const std::size_t n = val.size();
    EvalReport report;
    report.scenarios = n;
    using clock = std::chrono::steady_clock;

    for (std::size_t pi = 0; pi < predictors.size(); ++pi) {
        const auto& pred = predictors[pi];
        report.labels.push_back(pred.label);
        std::vector<ScenarioErrorRecord> recs(n);
        parallel_units(n, [&](std::size_t k) {
            const auto t0 = clock::now();
            const PredictedOccupancyGrid est = pred.fn(val[k]);
            const auto t1 = clock::now();
            recs[k].scenario = val[k].id;
            recs[k].predictor = pi;
            recs[k].error = banded_pog_error(val[k].pog, est);
            if (options.measure_latency) {
                recs[k].latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            }
        });

        PredictorSummary s;
        s.label = pred.label;
        std::array<std::size_t, 3> empty{};
        for (std::size_t b = 0; b < kBands.size(); ++b) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& r : recs) {
                const BandValue& v = r.error[kBands[b]];
                if (v.empty()) {
                    ++empty[b];
                } else {
                    sum += *v.error;
                    ++count;
                }
            }
            BandValue mean;
            mean.cells = count;  // number of scenarios contributing to the mean
            if (count > 0) {
                mean.error = sum / static_cast<double>(count);
            }
            (b == 0 ? s.low : b == 1 ? s.mid : s.high) = mean;
        }
        if (options.measure_latency) {
            // Serial timing loop so the numbers are not skewed by sibling threads.
            std::vector<double> ms(options.latency_calls);
            for (std::size_t c = 0; c < ms.size(); ++c) {
                const auto t0 = clock::now();
                const auto est = pred.fn(val[c % n]);
                ms[c] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            }
            if (!ms.empty()) {
                LatencyStats st;
                st.calls = ms.size();
                for (const double v : ms) {
                    st.mean_ms += v;
                }
                st.mean_ms /= static_cast<double>(ms.size());
                std::sort(ms.begin(), ms.end());
                st.median_ms = ms[ms.size() / 2];
                st.p95_ms = ms[std::min(ms.size() - 1, (ms.size() * 95) / 100)];
                s.latency = st;
            }
        }
        report.summary.push_back(std::move(s));
        report.empty_bands.push_back(empty);
        report.records.insert(report.records.end(), recs.begin(), recs.end());
    }

    // Bin edges are shared by all predictors so their histograms overlay.
    for (const Band band : kBands) {
        double top = 0.0;
        for (const auto& r : report.records) {
            if (const auto& v = r.error[band]; !v.empty()) {
                top = std::max(top, *v.error);
            }
        }
        if (top <= 0.0) {
            top = 1.0;
        }
        const std::size_t bins = options.histogram_bins;
        const double width = top / static_cast<double>(bins);
        for (std::size_t pi = 0; pi < predictors.size(); ++pi) {
            std::vector<std::size_t> counts(bins, 0);
            for (const auto& r : report.records) {
                const auto& v = r.error[band];
                if (r.predictor != pi || v.empty()) {
                    continue;
                }
                const auto idx = static_cast<std::size_t>(*v.error / width);
                ++counts[std::min(idx, bins - 1)];
            }
            for (std::size_t b = 0; b < bins; ++b) {
                report.histogram.push_back({pi, band, width * static_cast<double>(b),
                                            b + 1 == bins ? top : width * static_cast<double>(b + 1),
                                            counts[b]});
            }
        }
    }
    return report;
}

void write_records_csv(const EvalReport& report, const fs::path& path)
{
    auto out = open_csv(path);
    out << "scenario,architecture,eps_low,eps_mid,eps_high,latency_ms\n";
    for (const auto& r : report.records) {
        out << r.scenario << ',' << report.labels[r.predictor] << ',' << fmt(r.error.low) << ','
            << fmt(r.error.mid) << ',' << fmt(r.error.high) << ','
            << (r.latency_ms ? fmt(*r.latency_ms) : std::string()) << '\n';
    }
    close_csv(out, path);
}

void write_summary_csv(const EvalReport& report, const fs::path& path)
{
    auto out = open_csv(path);
    out << "architecture,eps_low,eps_mid,eps_high,n_low,n_mid,n_high,scenarios,"
           "latency_mean_ms,latency_median_ms,latency_p95_ms\n";
    for (const auto& s : report.summary) {
        out << s.label << ',' << fmt(s.low) << ',' << fmt(s.mid) << ',' << fmt(s.high) << ','
            << s.low.cells << ',' << s.mid.cells << ',' << s.high.cells << ',' << report.scenarios;
        if (s.latency) {
            out << ',' << fmt(s.latency->mean_ms) << ',' << fmt(s.latency->median_ms) << ','
                << fmt(s.latency->p95_ms);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    close_csv(out, path);
}

void write_histogram_csv(const EvalReport& report, const fs::path& path)
{
    auto out = open_csv(path);
    out << "architecture,band,bin_lower,bin_upper,count\n";
    for (const auto& h : report.histogram) {
        out << report.labels[h.predictor] << ',' << band_name(h.band) << ',' << fmt(h.lower)
            << ',' << fmt(h.upper) << ',' << h.count << '\n';
    }
    // Scenarios without cells in a band complete each column to the scenario count.
    for (std::size_t pi = 0; pi < report.labels.size(); ++pi) {
        for (std::size_t b = 0; b < kBands.size(); ++b) {
            out << report.labels[pi] << ',' << band_name(kBands[b]) << ",empty,empty,"
                << report.empty_bands[pi][b] << '\n';
        }
    }
    close_csv(out, path);
}

} // namespace pog
