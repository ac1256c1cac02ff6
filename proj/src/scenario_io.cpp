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


#include "pog/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pog/errors.hpp"

namespace pog {

using nlohmann::json;

namespace {

constexpr int kScenarioVersion = 1;

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

HypothesisSettings parse_settings(const json& j)
{
    HypothesisSettings s;
    if (j.is_null()) {
        return s;
    }
    s.count = get_or<std::size_t>(j, "count", s.count);
    s.horizon = get_or(j, "horizon", s.horizon);
    s.dt = get_or(j, "dt", s.dt);
    s.brake_decel = get_or(j, "brake_decel", s.brake_decel);
    if (j.contains("prior")) {
        s.prior = j.at("prior").get<std::array<double, 4>>();
    }
    s.validate();
    return s;
}

TrafficParticipant parse_participant(const json& j)
{
    TrafficParticipant p;
    p.id = j.at("id").get<int>();
    p.kind = parse_participant_kind(j.at("kind").get<std::string>());
    const auto pose = j.at("pose").get<std::array<double, 3>>();
    p.pose = {pose[0], pose[1], pose[2]};
    p.velocity = get_or(j, "velocity", 0.0);
    const auto accel = get_or<std::array<double, 2>>(j, "accel", {0.0, 0.0});
    p.accel_x = accel[0];
    p.accel_y = accel[1];
    Footprint fallback;
    if (p.kind == ParticipantKind::bicycle) {
        fallback = {1.8, 0.6};
    }
    const auto fp = get_or<std::array<double, 2>>(j, "footprint", {fallback.length, fallback.width});
    p.footprint = {fp[0], fp[1]};
    p.validate();
    return p;
}

} // namespace

Scenario parse_scenario(std::string_view text, const std::string& source)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(source + ": " + e.what());
    }
    try {
        const int version = get_or(doc, "version", kScenarioVersion);
        if (version != kScenarioVersion) {
            throw DataError(source + ": unsupported scenario version " + std::to_string(version));
        }
        const json& lj = doc.at("layout");
        const auto extent = get_or<std::array<double, 2>>(lj, "extent", {40.0, 40.0});
        Scenario sc;
        sc.road = RoadLayout::make(parse_layout_kind(lj.at("kind").get<std::string>()), extent[0],
                                   extent[1], get_or(lj, "lane_width", 3.5));
        sc.rng_seed = get_or<std::uint64_t>(doc, "seed", 0);
        const HypothesisSettings settings =
            parse_settings(doc.contains("hypotheses") ? doc.at("hypotheses") : json());

        for (const json& pj : doc.at("participants")) {
            TrafficParticipant p = parse_participant(pj);
            std::vector<TrajectoryHypothesis> hyps;
            if (pj.contains("hypotheses")) {
                for (const json& hj : pj.at("hypotheses")) {
                    auto h = rollout_maneuver(p, sc.road,
                                              parse_maneuver(hj.at("maneuver").get<std::string>()),
                                              settings, get_or(hj, "speed_scale", 1.0));
                    h.probability = hj.at("probability").get<double>();
                    hyps.push_back(std::move(h));
                }
            } else {
                hyps = generate_hypotheses(p, sc.road, settings);
            }
            sc.participants.push_back(p);
            sc.hypotheses.push_back(std::move(hyps));
        }
        sc.validate();
        return sc;
    } catch (const json::exception& e) {
        throw DataError(source + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(source + ": " + e.what());
    }
}

std::string dump_scenario(const Scenario& scenario, const HypothesisSettings& settings)
{
    json doc;
    doc["version"] = kScenarioVersion;
    doc["seed"] = scenario.rng_seed;
    doc["layout"] = {{"kind", std::string(to_string(scenario.road.kind))},
                     {"extent", {scenario.road.extent_x, scenario.road.extent_y}},
                     {"lane_width", scenario.road.lane_width}};
    doc["hypotheses"] = {{"count", settings.count},
                         {"horizon", settings.horizon},
                         {"dt", settings.dt},
                         {"brake_decel", settings.brake_decel},
                         {"prior", settings.prior}};
    json parts = json::array();
    for (std::size_t l = 0; l < scenario.participants.size(); ++l) {
        const auto& p = scenario.participants[l];
        json hyps = json::array();
        for (const auto& h : scenario.hypotheses[l]) {
            hyps.push_back({{"maneuver", std::string(to_string(h.maneuver))},
                            {"probability", h.probability},
                            {"speed_scale", h.speed_scale}});
        }
        parts.push_back({{"id", p.id},
                         {"kind", std::string(to_string(p.kind))},
                         {"pose", {p.pose.x, p.pose.y, p.pose.psi}},
                         {"velocity", p.velocity},
                         {"accel", {p.accel_x, p.accel_y}},
                         {"footprint", {p.footprint.length, p.footprint.width}},
                         {"hypotheses", hyps}});
    }
    doc["participants"] = parts;
    return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open scenario file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

void save_scenario(const Scenario& scenario, const HypothesisSettings& settings,
                   const std::filesystem::path& path)
{
    std::ofstream out(path);
    out << dump_scenario(scenario, settings);
    if (!out) {
        throw DataError("cannot write scenario file " + path.string());
    }
}

} // namespace pog
