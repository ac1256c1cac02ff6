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


#include "pog/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "pog/binary_io.hpp"
#include "pog/errors.hpp"

namespace pog::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Read-only view of one JSON object that remembers which keys were consumed,
/// so leftovers can be reported as unknown fields.
class Fields
{
public:
    Fields(const json& j, std::string path, const std::string& source)
        : mJson(j), mPath(std::move(path)), mSource(source)
    {
        if (!j.is_object()) {
            fail(mPath.empty() ? "config root must be an object" : "must be an object");
        }
    }

    template <typename T>
    void get(const char* key, T& dst)
    {
        const auto it = mJson.find(key);
        if (it == mJson.end()) {
            return;
        }
        mUsed.insert(key);
        try {
            dst = it->template get<T>();
        } catch (const json::exception&) {
            throw DataError(mSource + ": field '" + join(key) + "' has the wrong type");
        }
    }

    void get_path(const char* key, fs::path& dst)
    {
        std::string s = dst.string();
        get(key, s);
        dst = s;
    }

    /* Nested object, or nullptr when absent */
    const json* sub(const char* key)
    {
        const auto it = mJson.find(key);
        if (it == mJson.end()) {
            return nullptr;
        }
        mUsed.insert(key);
        return &*it;
    }

    std::string join(const std::string& key) const { return mPath.empty() ? key : mPath + "." + key; }
    const std::string& source() const { return mSource; }

    void finish() const
    {
        for (const auto& [key, value] : mJson.items()) {
            if (!mUsed.count(key)) {
                throw DataError(mSource + ": unknown field '" + join(key) + "'");
            }
        }
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw DataError(mSource + ": " + (mPath.empty() ? "" : "'" + mPath + "' ") + what);
    }

    const json& mJson;
    std::string mPath;
    const std::string& mSource;
    std::set<std::string> mUsed;
};

template <typename F>
void with_sub(Fields& parent, const char* key, F&& body)
{
    if (const json* j = parent.sub(key)) {
        Fields f(*j, parent.join(key), parent.source());
        body(f);
        f.finish();
    }
}

void read_footprint(Fields& f, const char* key, Footprint& fp)
{
    std::array<double, 2> v = {fp.length, fp.width};
    f.get(key, v);
    fp = {v[0], v[1]};
}

void read_dataset(Fields& f, DatasetSpec& d)
{
    std::string layout(to_string(d.layout));
    f.get("layout", layout);
    try {
        d.layout = parse_layout_kind(layout);
    } catch (const std::invalid_argument& e) {
        throw DataError(f.source() + ": " + e.what());
    }
    std::array<double, 2> extent = {d.extent_x, d.extent_y};
    f.get("extent", extent);
    d.extent_x = extent[0];
    d.extent_y = extent[1];
    f.get("lane_width", d.lane_width);
    f.get("cell_size", d.cell_size);
    f.get("t_pred", d.t_pred);
    f.get("n_total", d.n_total);
    f.get("train_fraction", d.train_fraction);
    f.get("seed", d.seed);
    with_sub(f, "hypotheses", [&](Fields& h) {
        auto& s = d.sampler.hypotheses;
        h.get("count", s.count);
        h.get("horizon", s.horizon);
        h.get("dt", s.dt);
        h.get("brake_decel", s.brake_decel);
        h.get("prior", s.prior);
    });
    with_sub(f, "sampler", [&](Fields& s) {
        auto& sm = d.sampler;
        s.get("position_range", sm.position_range);
        s.get("start_offset", sm.start_offset);
        std::array<double, 2> speed = {sm.speed_min_kmh, sm.speed_max_kmh};
        s.get("speed_kmh", speed);
        sm.speed_min_kmh = speed[0];
        sm.speed_max_kmh = speed[1];
        s.get("heading_range_deg", sm.heading_range_deg);
        std::array<double, 2> accel = {sm.accel_min, sm.accel_max};
        s.get("accel", accel);
        sm.accel_min = accel[0];
        sm.accel_max = accel[1];
        read_footprint(s, "car", sm.car);
        read_footprint(s, "bicycle", sm.bicycle);
        std::array<double, 3> ego = {sm.ego_pose.x, sm.ego_pose.y, sm.ego_pose.psi};
        s.get("ego_pose", ego);
        sm.ego_pose = {ego[0], ego[1], ego[2]};
    });
}

void read_sda(Fields& f, SdaSpec& s)
{
    f.get("hidden", s.hidden);
    auto& t = s.train;
    f.get("epochs", t.epochs);
    f.get("learning_rate", t.learning_rate);
    f.get("weight_decay", t.weight_decay);
    f.get("batch_size", t.batch_size);
    f.get("seed", t.rng_seed);
    std::string act(to_string(t.activation));
    f.get("activation", act);
    with_sub(f, "corruption", [&](Fields& c) {
        std::string kind(to_string(t.corruption.kind));
        c.get("kind", kind);
        c.get("strength", t.corruption.strength);
        try {
            t.corruption.kind = parse_corruption(kind);
        } catch (const std::invalid_argument& e) {
            throw DataError(f.source() + ": " + e.what());
        }
    });
    try {
        t.activation = parse_activation(act);
    } catch (const std::invalid_argument& e) {
        throw DataError(f.source() + ": " + e.what());
    }
}

void read_forest(Fields& f, ForestParams& p)
{
    f.get("n_trees", p.n_trees);
    f.get("mtry", p.mtry);
    f.get("max_depth", p.max_depth);
    f.get("min_samples_leaf", p.min_samples_leaf);
    f.get("bootstrap", p.bootstrap);
    f.get("seed", p.rng_seed);
}

void read_arch3(Fields& f, Arch3Spec& a)
{
    auto& t = a.train;
    f.get("epochs", t.epochs);
    f.get("learning_rate", t.learning_rate);
    f.get("batch_size", t.batch_size);
    f.get("seed", t.rng_seed);
    f.get("encoder_filters", t.arch.encoder_filters);
    f.get("decoder_filters", t.arch.decoder_filters);
    f.get("kernel", t.arch.kernel);
    f.get("stride", t.arch.stride);
    f.get("monitor_samples", a.monitor_samples);
}

json sda_json(const SdaSpec& s)
{
    const auto& t = s.train;
    return {{"hidden", s.hidden},
            {"epochs", t.epochs},
            {"learning_rate", t.learning_rate},
            {"weight_decay", t.weight_decay},
            {"batch_size", t.batch_size},
            {"seed", t.rng_seed},
            {"activation", std::string(to_string(t.activation))},
            {"corruption",
             {{"kind", std::string(to_string(t.corruption.kind))},
              {"strength", t.corruption.strength}}}};
}

json forest_json(const ForestParams& p)
{
    return {{"n_trees", p.n_trees},
            {"mtry", p.mtry},
            {"max_depth", p.max_depth},
            {"min_samples_leaf", p.min_samples_leaf},
            {"bootstrap", p.bootstrap},
            {"seed", p.rng_seed}};
}

json config_json(const RunConfig& c)
{
    const auto& d = c.dataset;
    const auto& sm = d.sampler;
    const auto& h = sm.hypotheses;
    const auto& t = c.arch3.train;
    return {
        {"dataset",
         {{"layout", std::string(to_string(d.layout))},
          {"extent", {d.extent_x, d.extent_y}},
          {"lane_width", d.lane_width},
          {"cell_size", d.cell_size},
          {"t_pred", d.t_pred},
          {"n_total", d.n_total},
          {"train_fraction", d.train_fraction},
          {"seed", d.seed},
          {"hypotheses",
           {{"count", h.count},
            {"horizon", h.horizon},
            {"dt", h.dt},
            {"brake_decel", h.brake_decel},
            {"prior", h.prior}}},
          {"sampler",
           {{"position_range", sm.position_range},
            {"start_offset", sm.start_offset},
            {"speed_kmh", {sm.speed_min_kmh, sm.speed_max_kmh}},
            {"heading_range_deg", sm.heading_range_deg},
            {"accel", {sm.accel_min, sm.accel_max}},
            {"car", {sm.car.length, sm.car.width}},
            {"bicycle", {sm.bicycle.length, sm.bicycle.width}},
            {"ego_pose", {sm.ego_pose.x, sm.ego_pose.y, sm.ego_pose.psi}}}}}},
        {"arch1", {{"sda", sda_json(c.arch1.sda)}, {"forest", forest_json(c.arch1.forest)}}},
        {"arch2",
         {{"sda_in", sda_json(c.arch2.sda_in)},
          {"sda_out", sda_json(c.arch2.sda_out)},
          {"forest", forest_json(c.arch2.forest)},
          {"quantized_targets", c.arch2.quantized_targets}}},
        {"arch3",
         {{"epochs", t.epochs},
          {"learning_rate", t.learning_rate},
          {"batch_size", t.batch_size},
          {"seed", t.rng_seed},
          {"encoder_filters", t.arch.encoder_filters},
          {"decoder_filters", t.arch.decoder_filters},
          {"kernel", t.arch.kernel},
          {"stride", t.arch.stride},
          {"monitor_samples", c.arch3.monitor_samples}}},
        {"paths", {{"dataset", c.paths.dataset.string()}, {"output", c.paths.output.string()}}}};
}

void validate_sda(const SdaSpec& s, const std::string& name)
{
    require(!s.hidden.empty(), name + ": at least one hidden layer");
    for (const std::size_t h : s.hidden) {
        require(h >= 1, name + ": hidden sizes must be >= 1");
    }
    s.train.validate();
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    out.close();
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

Dataset load_matching_dataset(const RunConfig& config)
{
    Dataset ds = load_dataset(config.paths.dataset);
    const std::string expected =
        grid_config_hash(config.dataset.grid(), config.dataset.t_pred);
    if (ds.config_hash != expected) {
        throw DataError("dataset " + config.paths.dataset.string() + " has config " +
                        ds.config_hash + " but the run config describes " + expected);
    }
    return ds;
}

} // namespace

void RunConfig::validate() const
{
    dataset.validate();
    validate_sda(arch1.sda, "arch1.sda");
    arch1.forest.validate();
    validate_sda(arch2.sda_in, "arch2.sda_in");
    validate_sda(arch2.sda_out, "arch2.sda_out");
    arch2.forest.validate();
    arch3.train.validate();
    require(arch3.train.arch.classes == kLevelCount, "arch3 must predict the six levels");
    require(arch3.train.arch.encoder_filters >= 1 && arch3.train.arch.decoder_filters >= 1,
            "arch3 filter counts must be >= 1");
}

RunConfig desk_config()
{
    RunConfig c;
    auto& d = c.dataset;
    d.extent_x = 20.0;
    d.extent_y = 20.0;
    d.cell_size = 1.0;
    d.n_total = 2500;
    d.train_fraction = 0.8;
    d.sampler.position_range = 4.0;
    d.sampler.bicycle = {1.8, 1.0};

    SdaSpec aog;
    aog.hidden = {200, 80, 30};
    aog.train.epochs = 20;
    aog.train.learning_rate = 4e-4;
    aog.train.corruption.strength = 0.05;
    SdaSpec pog;
    pog.hidden = {120, 60, 30};
    pog.train.epochs = 40;
    pog.train.learning_rate = 0.02;
    pog.train.corruption.strength = 0.05;

    c.arch1.sda = aog;
    c.arch1.forest.n_trees = 30;
    c.arch2.sda_in = aog;
    c.arch2.sda_out = pog;
    c.arch2.forest.n_trees = 30;
    c.arch3.train.epochs = 30;
    c.arch3.train.learning_rate = 0.05;
    c.arch3.train.batch_size = 16;
    return c;
}

RunConfig paper_config()
{
    RunConfig c;
    auto& d = c.dataset;
    d.extent_x = 40.0;
    d.extent_y = 40.0;
    d.cell_size = 0.5;
    d.n_total = 33280;
    d.train_fraction = 24280.0 / 33280.0;
    c.arch1.sda.hidden = {7000, 5000, 2000};
    c.arch2.sda_in.hidden = {7000, 5000, 2000};
    c.arch2.sda_out.hidden = {5000, 3000, 2000};
    c.arch3.train.arch.encoder_filters = 20;
    c.arch3.train.arch.decoder_filters = 20;
    return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& source,
                           const RunConfig& base)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(source + ": " + e.what());
    }
    RunConfig c = base;
    Fields root(j, "", source);
    with_sub(root, "dataset", [&](Fields& f) { read_dataset(f, c.dataset); });
    with_sub(root, "arch1", [&](Fields& f) {
        with_sub(f, "sda", [&](Fields& g) { read_sda(g, c.arch1.sda); });
        with_sub(f, "forest", [&](Fields& g) { read_forest(g, c.arch1.forest); });
    });
    with_sub(root, "arch2", [&](Fields& f) {
        with_sub(f, "sda_in", [&](Fields& g) { read_sda(g, c.arch2.sda_in); });
        with_sub(f, "sda_out", [&](Fields& g) { read_sda(g, c.arch2.sda_out); });
        with_sub(f, "forest", [&](Fields& g) { read_forest(g, c.arch2.forest); });
        f.get("quantized_targets", c.arch2.quantized_targets);
    });
    with_sub(root, "arch3", [&](Fields& f) { read_arch3(f, c.arch3); });
    with_sub(root, "paths", [&](Fields& f) {
        f.get_path("dataset", c.paths.dataset);
        f.get_path("output", c.paths.output);
    });
    root.finish();
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(source + ": " + e.what());
    }
    return c;
}

RunConfig load_run_config(const fs::path& path, const RunConfig& base)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot read config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.string(), base);
}

RunConfig apply_override(const RunConfig& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override '" + assignment + "' is not of the form path=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    json overlay = value;
    std::size_t end = path.size();
    while (true) {
        const auto dot = path.rfind('.', end - 1);
        const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
        const std::string key = path.substr(start, end - start);
        if (key.empty()) {
            throw std::invalid_argument("override '" + assignment + "' has an empty path segment");
        }
        overlay = json{{key, overlay}};
        if (dot == std::string::npos) {
            break;
        }
        end = dot;
    }
    return parse_run_config(overlay.dump(), "--set " + path, config);
}

std::string dump_run_config(const RunConfig& config) { return config_json(config).dump(2); }

fs::path cmd_generate(const RunConfig& config, std::ostream& out)
{
    config.validate();
    const fs::path manifest = generate_dataset(config.dataset, config.paths.dataset);
    json j = read_json(manifest);
    j["run_config"] = config_json(config);
    write_json(manifest, j);
    out << manifest.string() << "\n";
    return manifest;
}

fs::path cmd_import(const RunConfig& config, const std::vector<fs::path>& scenarios,
                    std::ostream& out)
{
    config.validate();
    const fs::path manifest = import_scenarios(scenarios, config.dataset.grid(),
                                               config.dataset.t_pred, config.paths.dataset);
    json j = read_json(manifest);
    j["run_config"] = config_json(config);
    write_json(manifest, j);
    out << manifest.string() << "\n";
    return manifest;
}

void cmd_train(const RunConfig& config, ArchitectureId arch, const fs::path& bundle_dir,
               std::ostream& out)
{
    config.validate();
    const Dataset ds = load_matching_dataset(config);
    TrainingLog log;
    TrainedPredictor p;
    switch (arch) {
    case ArchitectureId::arch1: p = train_arch1(ds, config.arch1, &log); break;
    case ArchitectureId::arch2: p = train_arch2(ds, config.arch2, &log); break;
    case ArchitectureId::arch3: p = train_arch3(ds, config.arch3, &log); break;
    }
    for (const auto& curve : log) {
        out << curve.name << ":";
        char buf[32];
        for (const double v : curve.values) {
            std::snprintf(buf, sizeof(buf), " %.6g", v);
            out << buf;
        }
        out << "\n";
    }
    save_predictor(p, bundle_dir, dump_run_config(config));
    out << (bundle_dir / "manifest.json").string() << "\n";
}

void cmd_predict(const fs::path& bundle_dir, const fs::path& aog_file, const fs::path& out_file,
                 std::ostream& out)
{
    const TrainedPredictor p = load_predictor(bundle_dir);
    const io::GridFile file = io::read_grid(aog_file);
    AugmentedOccupancyGrid aog(p.grid.with_attributes(AugmentedOccupancyGrid::kAttributes));
    try {
        aog = io::to_aog(file, aog.config());
    } catch (const std::invalid_argument& e) {
        throw DataError(aog_file.string() + ": " + e.what());
    }
    io::write_grid(out_file, io::to_file(predict(p, aog)));
    out << out_file.string() << "\n";
}

EvalReport cmd_eval(const RunConfig& config, const std::vector<fs::path>& bundles,
                    const fs::path& out_dir, const EvalOptions& options, std::ostream& out)
{
    config.validate();
    require(!bundles.empty(), "no bundles to evaluate");
    const Dataset ds = load_matching_dataset(config);
    std::vector<TrainedPredictor> predictors;
    for (const auto& b : bundles) {
        predictors.push_back(load_predictor(b));
    }
    std::vector<PredictorRef> refs;
    std::set<std::string> used;
    for (std::size_t k = 0; k < predictors.size(); ++k) {
        std::string label(to_string(predictors[k].id));
        if (!used.insert(label).second) {
            label += "_" + std::to_string(k);
            used.insert(label);
        }
        refs.push_back(as_ref(predictors[k], label));
    }
    EvalReport report = evaluate(refs, ds, options);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw DataError("cannot create output directory " + out_dir.string());
    }
    write_records_csv(report, out_dir / "records.csv");
    write_summary_csv(report, out_dir / "summary.csv");
    write_histogram_csv(report, out_dir / "histogram.csv");
    json bundle_list = json::array();
    for (std::size_t k = 0; k < predictors.size(); ++k) {
        bundle_list.push_back({{"label", report.labels[k]},
                               {"path", bundles[k].string()},
                               {"architecture", std::string(to_string(predictors[k].id))}});
    }
    json reference = json::array();
    for (const auto& r : kReferenceErrors) {
        reference.push_back({{"architecture", std::string(r.label)},
                             {"eps_low", r.low},
                             {"eps_mid", r.mid},
                             {"eps_high", r.high}});
    }
    write_json(out_dir / "manifest.json",
               {{"version", 1},
                {"config_hash", ds.config_hash},
                {"scenarios", report.scenarios},
                {"bundles", bundle_list},
                {"latency_measured", options.measure_latency},
                {"published_reference", reference},
                {"files", {"records.csv", "summary.csv", "histogram.csv"}},
                {"run_config", config_json(config)}});

    for (const auto& s : report.summary) {
        char buf[160];
        const auto v = [](const BandValue& b) { return b.error.value_or(std::nan("")); };
        std::snprintf(buf, sizeof(buf), "%-8s eps_low %.4f  eps_mid %.4f  eps_high %.4f",
                      s.label.c_str(), v(s.low), v(s.mid), v(s.high));
        out << buf;
        if (s.latency) {
            std::snprintf(buf, sizeof(buf), "  latency %.3f ms", s.latency->mean_ms);
            out << buf;
        }
        out << "\n";
    }
    return report;
}

std::vector<std::uint8_t> render_pixels(const io::GridFile& grid)
{
    const std::size_t cells = static_cast<std::size_t>(grid.rows) * grid.cols;
    if (grid.attributes != 1 && grid.attributes != AugmentedOccupancyGrid::kAttributes) {
        throw DataError("cannot render a grid with " + std::to_string(grid.attributes) +
                        " attributes per cell");
    }
    std::vector<std::uint8_t> px(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const double p = grid.values[c * grid.attributes];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DataError("cell " + std::to_string(c) + " holds " + std::to_string(p) +
                            ", outside [0, 1]");
        }
        px[c] = static_cast<std::uint8_t>(std::lround(255.0 * p));
    }
    return px;
}

void cmd_render(const fs::path& grid_file, const fs::path& image_file)
{
    const io::GridFile grid = io::read_grid(grid_file);
    const auto px = render_pixels(grid);
    const std::string header =
        "P5\n" + std::to_string(grid.cols) + " " + std::to_string(grid.rows) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), px.begin(), px.end());
    io::write_file_bytes(image_file, bytes);
}

int default_thread_count()
{
    if (const char* env = std::getenv("POG_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1) {
            return static_cast<int>(n);
        }
    }
    return omp_get_max_threads();
}

} // namespace pog::cli
