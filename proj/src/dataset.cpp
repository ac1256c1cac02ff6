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


#include "pog/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "pog/binary_io.hpp"
#include "pog/errors.hpp"
#include "pog/grid_io.hpp"
#include "pog/rng.hpp"
#include "pog/scenario_io.hpp"

namespace pog {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace io;

namespace {

constexpr int kManifestVersion = 1;
constexpr std::uint64_t kSplitStream = 0xffffffffffffffffULL;

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

json spec_json(const DatasetSpec& s)
{
    const auto& sm = s.sampler;
    const auto& h = sm.hypotheses;
    return {{"layout", std::string(to_string(s.layout))},
            {"extent", {s.extent_x, s.extent_y}},
            {"lane_width", s.lane_width},
            {"cell_size", s.cell_size},
            {"t_pred", s.t_pred},
            {"n_total", s.n_total},
            {"train_fraction", s.train_fraction},
            {"seed", s.seed},
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
              {"ego_pose", {sm.ego_pose.x, sm.ego_pose.y, sm.ego_pose.psi}}}}};
}

std::string stem_for(const std::string& split, std::size_t id)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%06zu", id);
    return split + "/" + buf;
}

void write_record(const fs::path& dir, const std::string& stem, const Scenario& scenario,
                  const GridConfig& grid, double t_pred)
{
    const auto aog = build_aog(scenario, grid);
    const auto pog = compute_ground_truth_pog(scenario, grid, t_pred);
    write_grid(dir / (stem + ".aog.pogg"), to_file(aog));
    write_grid(dir / (stem + ".pog.pogg"), to_file(pog));
    write_grid(dir / (stem + ".qpog.pogg"), to_file(quantize_pog(pog)));
}

void prepare_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir / "train", ec);
    fs::create_directories(dir / "val", ec);
    if (ec || !fs::is_directory(dir / "val")) {
        throw DataError("cannot create dataset directory " + dir.string() +
                        (ec ? ": " + ec.message() : ""));
    }
}

fs::path write_manifest(const fs::path& dir, json manifest)
{
    const fs::path path = dir / "manifest.json";
    std::ofstream out(path);
    out << manifest.dump(2) << "\n";
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return path;
}

// Runs body(k) for k in [0, n) in parallel and rethrows the first failure by index.
template <typename F>
void parallel_records(std::size_t n, F&& body)
{
    std::vector<std::string> errors(n);
    std::vector<int> kinds(n, 0);
#pragma omp parallel for schedule(dynamic, 4)
    for (long kl = 0; kl < static_cast<long>(n); ++kl) {
        const auto k = static_cast<std::size_t>(kl);
        try {
            body(k);
        } catch (const DataError& e) {
            errors[k] = e.what();
            kinds[k] = 1;
        } catch (const std::exception& e) {
            errors[k] = e.what();
            kinds[k] = 2;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (kinds[k] == 1) {
            throw DataError(errors[k]);
        }
        if (kinds[k] == 2) {
            throw std::invalid_argument(errors[k]);
        }
    }
}

} // namespace

void DatasetSpec::validate() const
{
    require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
    require(n_total >= 1, "dataset needs at least one scenario");
    require(cell_size > 0.0, "cell size must be positive");
    require(t_pred >= 0.0 && t_pred <= sampler.hypotheses.horizon + 1e-9,
            "t_pred must lie within the hypothesis horizon");
    sampler.validate();
    road();
}

RoadLayout DatasetSpec::road() const
{
    return RoadLayout::make(layout, extent_x, extent_y, lane_width);
}

GridConfig DatasetSpec::grid() const { return grid_for_layout(road(), cell_size, 1); }

std::size_t train_count(std::size_t n_total, double fraction)
{
    return static_cast<std::size_t>(std::llround(static_cast<double>(n_total) * fraction));
}

std::string grid_config_hash(const GridConfig& grid, double t_pred)
{
    json j = grid_json(grid);
    j["t_pred"] = t_pred;
    return hex64(fnv1a(j.dump()));
}

fs::path generate_dataset(const DatasetSpec& spec, const fs::path& dir)
{
    spec.validate();
    prepare_dir(dir);
    const RoadLayout road = spec.road();
    const GridConfig grid = spec.grid();

    std::vector<std::size_t> order(spec.n_total);
    for (std::size_t k = 0; k < order.size(); ++k) {
        order[k] = k;
    }
    Rng split_rng(spec.seed, {kSplitStream});
    split_rng.shuffle(order);
    const std::size_t n_train = train_count(spec.n_total, spec.train_fraction);
    std::vector<std::string> stems(spec.n_total);
    std::vector<std::uint64_t> seeds(spec.n_total);
    for (std::size_t r = 0; r < order.size(); ++r) {
        stems[order[r]] = stem_for(r < n_train ? "train" : "val", order[r]);
    }

    parallel_records(spec.n_total, [&](std::size_t k) {
        seeds[k] = Rng(spec.seed, {k}).next();
        const Scenario sc = sample_scenario(road, seeds[k], spec.sampler);
        write_record(dir, stems[k], sc, grid, spec.t_pred);
    });

    json records = json::array();
    for (std::size_t k = 0; k < spec.n_total; ++k) {
        records.push_back({{"id", k}, {"seed", seeds[k]}, {"stem", stems[k]}});
    }
    return write_manifest(dir, {{"version", kManifestVersion},
                                {"source", "sampled"},
                                {"config_hash", grid_config_hash(grid, spec.t_pred)},
                                {"grid", grid_json(grid)},
                                {"t_pred", spec.t_pred},
                                {"counts", {{"train", n_train}, {"val", spec.n_total - n_train}}},
                                {"spec", spec_json(spec)},
                                {"records", records}});
}

fs::path import_scenarios(const std::vector<fs::path>& files, const GridConfig& grid,
                          double t_pred, const fs::path& dir)
{
    require(!files.empty(), "no scenario files given");
    grid.validate();
    prepare_dir(dir);
    std::vector<std::string> stems(files.size());
    parallel_records(files.size(), [&](std::size_t k) {
        stems[k] = stem_for("val", k);
        write_record(dir, stems[k], load_scenario(files[k]), grid.with_attributes(1), t_pred);
    });
    json records = json::array();
    for (std::size_t k = 0; k < files.size(); ++k) {
        records.push_back({{"id", k}, {"file", files[k].filename().string()}, {"stem", stems[k]}});
    }
    return write_manifest(dir, {{"version", kManifestVersion},
                                {"source", "imported"},
                                {"config_hash", grid_config_hash(grid.with_attributes(1), t_pred)},
                                {"grid", grid_json(grid)},
                                {"t_pred", t_pred},
                                {"counts", {{"train", 0}, {"val", files.size()}}},
                                {"records", records}});
}

Dataset load_dataset(const fs::path& dir)
{
    const fs::path path = dir / "manifest.json";
    std::ifstream in(path);
    if (!in) {
        throw DataError("dataset manifest not found: " + path.string());
    }
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }

    Dataset ds;
    std::vector<std::pair<std::size_t, std::string>> entries;
    try {
        if (manifest.at("version").get<int>() != kManifestVersion) {
            throw DataError(path.string() + ": unsupported manifest version");
        }
        ds.grid = grid_from_json(manifest.at("grid"));
        ds.t_pred = manifest.at("t_pred").get<double>();
        ds.config_hash = manifest.at("config_hash").get<std::string>();
        for (const json& r : manifest.at("records")) {
            entries.emplace_back(r.at("id").get<std::size_t>(), r.at("stem").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (grid_config_hash(ds.grid, ds.t_pred) != ds.config_hash) {
        throw DataError(path.string() + ": config_hash does not match the grid and t_pred");
    }

    const GridConfig aog_grid = ds.grid.with_attributes(AugmentedOccupancyGrid::kAttributes);
    std::vector<std::optional<DatasetRecord>> loaded(entries.size());
    parallel_records(entries.size(), [&](std::size_t k) {
        const std::string& stem = entries[k].second;
        loaded[k].emplace(DatasetRecord{
            entries[k].first, to_aog(read_grid(dir / (stem + ".aog.pogg")), aog_grid),
            to_pog(read_grid(dir / (stem + ".pog.pogg")), ds.grid),
            to_quantized_pog(read_grid(dir / (stem + ".qpog.pogg")), ds.grid)});
    });
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const bool train = entries[k].second.rfind("train/", 0) == 0;
        (train ? ds.train : ds.validation).push_back(std::move(*loaded[k]));
    }
    return ds;
}

} // namespace pog
