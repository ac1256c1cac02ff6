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

#include "pog/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pog/errors.hpp"
#include "pog/rng.hpp"

namespace pog {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTimeEps = 1e-9;

double wrap_angle(double a)
{
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) {
        a += 2.0 * kPi;
    }
    return a - kPi;
}

Point2 heading_vector(double psi) { return {std::cos(psi), std::sin(psi)}; }
/* Unit vector pointing to the right of heading psi */
Point2 right_of(double psi) { return {std::sin(psi), -std::cos(psi)}; }

} // namespace

void TrafficParticipant::validate() const
{
    require(footprint.length > 0.0 && footprint.width > 0.0,
            "participant " + std::to_string(id) + ": footprint dimensions must be > 0");
    require(velocity >= 0.0 && std::isfinite(velocity),
            "participant " + std::to_string(id) + ": velocity must be >= 0");
    require(std::isfinite(pose.x) && std::isfinite(pose.y) && std::isfinite(pose.psi) &&
                std::isfinite(accel_x) && std::isfinite(accel_y),
            "participant " + std::to_string(id) + ": non-finite state");
}

void TrajectoryHypothesis::validate() const
{
    require(!poses.empty(), "hypothesis without poses");
    require(probability >= 0.0 && probability <= 1.0, "hypothesis probability outside [0, 1]");
    for (std::size_t k = 1; k < poses.size(); ++k) {
        require(poses[k].t > poses[k - 1].t, "hypothesis pose times must strictly increase");
    }
}

Pose TrajectoryHypothesis::pose_at(double t) const
{
    require(!poses.empty(), "hypothesis without poses");
    require(t >= poses.front().t - kTimeEps && t <= poses.back().t + kTimeEps,
            "t_pred " + std::to_string(t) + " s outside the hypothesis horizon [" +
                std::to_string(poses.front().t) + ", " + std::to_string(poses.back().t) + "]");
    // Exact sample hit (the usual case: t_pred on the dt lattice).
    for (const auto& p : poses) {
        if (std::abs(p.t - t) <= kTimeEps) {
            return {p.x, p.y, p.psi};
        }
    }
    const auto upper = std::upper_bound(poses.begin(), poses.end(), t,
                                        [](double v, const TimedPose& p) { return v < p.t; });
    const TimedPose& b = *upper;
    const TimedPose& a = *(upper - 1);
    const double w = (t - a.t) / (b.t - a.t);
    return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y), a.psi + w * (b.psi - a.psi)};
}

RoadLayout RoadLayout::make(LayoutKind kind, double extent_x, double extent_y, double lane_width)
{
    RoadLayout r;
    r.kind = kind;
    r.extent_x = extent_x;
    r.extent_y = extent_y;
    r.lane_width = lane_width;
    r.center = {0.5 * extent_x, 0.5 * lane_width};
    r.validate();

    const double cx = r.center.x;
    const double cy = r.center.y;
    const double b = r.box_half();
    const double half_road = lane_width;
    const double y_lo = r.min_y();
    const double y_hi = y_lo + extent_y;
    auto line = [&r](Point2 p, Point2 q) { r.markings.push_back(Polyline{{p, q}}); };

    // Ego-side and ahead arms run along x, left and right arms along y.
    for (double off : {-half_road, 0.0, half_road}) {
        line({0.0, cy + off}, {cx - b, cy + off});
        line({cx + b, cy + off}, {extent_x, cy + off});
        line({cx + off, cy + b}, {cx + off, y_hi});
        line({cx + off, y_lo}, {cx + off, cy - b});
    }
    if (kind == LayoutKind::four_way_left_no_entry) {
        // Barrier across the lane that would carry traffic into the left arm.
        line({cx, cy + b}, {cx + lane_width, cy + b});
    }

    for (Arm arm : kAllArms) {
        auto& allowed = r.permitted[static_cast<std::size_t>(arm)];
        for (Maneuver m : kAllManeuvers) {
            const bool into_left = m != Maneuver::brake_to_stop && exit_arm(arm, m) == Arm::left;
            if (kind == LayoutKind::four_way_left_no_entry && into_left) {
                continue;
            }
            allowed.push_back(m);
        }
    }
    return r;
}

void RoadLayout::validate() const
{
    require(extent_x > 0.0 && extent_y > 0.0, "road extent must be positive");
    require(lane_width > 0.0, "lane width must be positive");
    require(2.0 * box_half() < std::min(extent_x, extent_y),
            "road extent too small for the junction box");
}

bool RoadLayout::on_road(Point2 p) const
{
    const double dx = std::abs(p.x - center.x);
    const double dy = std::abs(p.y - center.y);
    const bool in_x = p.x >= 0.0 && p.x <= extent_x;
    const bool in_y = p.y >= min_y() && p.y <= min_y() + extent_y;
    if (!in_x || !in_y) {
        return false;
    }
    return dx <= lane_width || dy <= lane_width;
}

double RoadLayout::inbound_heading(Arm arm)
{
    switch (arm) {
    case Arm::ego_side: return 0.0;
    case Arm::ahead: return kPi;
    case Arm::left: return -0.5 * kPi;
    case Arm::right: return 0.5 * kPi;
    }
    return 0.0;
}

Arm RoadLayout::approach_arm(double psi)
{
    Arm best = Arm::ego_side;
    double best_diff = 10.0;
    for (Arm arm : kAllArms) {
        const double diff = std::abs(wrap_angle(psi - inbound_heading(arm)));
        if (diff < best_diff) {
            best_diff = diff;
            best = arm;
        }
    }
    return best;
}

Arm RoadLayout::exit_arm(Arm from, Maneuver m)
{
    double heading = inbound_heading(from);
    if (m == Maneuver::left_turn) {
        heading += 0.5 * kPi;
    } else if (m == Maneuver::right_turn) {
        heading -= 0.5 * kPi;
    }
    // Leaving through an arm means travelling opposite to its inbound heading.
    return approach_arm(heading + kPi);
}

GridConfig grid_for_layout(const RoadLayout& layout, double cell_size, std::size_t attributes)
{
    require(cell_size > 0.0, "cell size must be positive");
    GridConfig c;
    c.rows = static_cast<std::size_t>(std::llround(layout.extent_x / cell_size));
    c.cols = static_cast<std::size_t>(std::llround(layout.extent_y / cell_size));
    c.cell_length = cell_size;
    c.cell_width = cell_size;
    c.origin = {0.0, layout.min_y()};
    c.attributes = attributes;
    c.validate();
    return c;
}

void HypothesisSettings::validate() const
{
    require(count >= 1, "hypothesis count must be >= 1");
    require(horizon > 0.0 && dt > 0.0, "horizon and dt must be positive");
    const double steps = horizon / dt;
    require(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps),
            "dt must divide the horizon");
    require(brake_decel > 0.0, "brake deceleration must be positive");
    for (double w : prior) {
        require(w >= 0.0 && std::isfinite(w), "maneuver prior weights must be >= 0");
    }
}

void Scenario::validate() const
{
    require(hypotheses.size() == participants.size(),
            "scenario needs one hypothesis list per participant");
    std::size_t egos = 0;
    for (std::size_t l = 0; l < participants.size(); ++l) {
        participants[l].validate();
        egos += participants[l].kind == ParticipantKind::ego ? 1 : 0;
        double sum = 0.0;
        for (const auto& h : hypotheses[l]) {
            h.validate();
            sum += h.probability;
        }
        require(!hypotheses[l].empty() && std::abs(sum - 1.0) <= 1e-9,
                "hypothesis probabilities of participant " + std::to_string(participants[l].id) +
                    " do not sum to 1");
    }
    require(egos == 1, "scenario needs exactly one ego participant, has " + std::to_string(egos));
}

std::vector<std::uint8_t> footprint_mask(const Pose& pose, const Footprint& footprint,
                                         const GridConfig& config)
{
    config.validate();
    std::vector<std::uint8_t> mask(config.cells(), 0);
    const double hl = 0.5 * footprint.length;
    const double hw = 0.5 * footprint.width;
    const double c = std::cos(pose.psi);
    const double s = std::sin(pose.psi);
    // Axis-aligned bounds of the rotated rectangle.
    const double ex = std::abs(c) * hl + std::abs(s) * hw;
    const double ey = std::abs(s) * hl + std::abs(c) * hw;
    const double fi_lo = std::floor((pose.x - ex - config.origin.x) / config.cell_length);
    const double fi_hi = std::floor((pose.x + ex - config.origin.x) / config.cell_length);
    const double fj_lo = std::floor((pose.y - ey - config.origin.y) / config.cell_width);
    const double fj_hi = std::floor((pose.y + ey - config.origin.y) / config.cell_width);
    const double rows = static_cast<double>(config.rows);
    const double cols = static_cast<double>(config.cols);
    if (fi_hi < 0.0 || fj_hi < 0.0 || fi_lo >= rows || fj_lo >= cols) {
        return mask;
    }
    const auto i0 = static_cast<std::size_t>(std::max(0.0, fi_lo));
    const auto i1 = static_cast<std::size_t>(std::min(rows - 1.0, fi_hi));
    const auto j0 = static_cast<std::size_t>(std::max(0.0, fj_lo));
    const auto j1 = static_cast<std::size_t>(std::min(cols - 1.0, fj_hi));
    for (std::size_t i = i0; i <= i1; ++i) {
        for (std::size_t j = j0; j <= j1; ++j) {
            const Point2 p = config.cell_center(i, j);
            const double dx = p.x - pose.x;
            const double dy = p.y - pose.y;
            const double along = dx * c + dy * s;
            const double across = -dx * s + dy * c;
            if (std::abs(along) <= hl && std::abs(across) <= hw) {
                mask[config.index(i, j)] = 1;
            }
        }
    }
    return mask;
}

bool footprint_clipped(const Pose& pose, const Footprint& footprint, const GridConfig& config)
{
    const double hl = 0.5 * footprint.length;
    const double hw = 0.5 * footprint.width;
    const double c = std::cos(pose.psi);
    const double s = std::sin(pose.psi);
    const double x_hi = config.origin.x + config.extent_x();
    const double y_hi = config.origin.y + config.extent_y();
    for (double a : {-hl, hl}) {
        for (double b : {-hw, hw}) {
            const double x = pose.x + a * c - b * s;
            const double y = pose.y + a * s + b * c;
            if (x < config.origin.x || x > x_hi || y < config.origin.y || y > y_hi) {
                return true;
            }
        }
    }
    return false;
}

namespace {

void check_coverage(const RoadLayout& road, const GridConfig& config)
{
    constexpr double tol = 1e-9;
    const bool covers = config.origin.x <= tol &&
                        config.origin.x + config.extent_x() >= road.extent_x - tol &&
                        config.origin.y <= road.min_y() + tol &&
                        config.origin.y + config.extent_y() >= road.min_y() + road.extent_y - tol;
    require(covers, "grid does not cover the road extent");
}

void trace_polyline(const Polyline& line, const GridConfig& config, std::vector<double>& values)
{
    const double step = 0.25 * std::min(config.cell_length, config.cell_width);
    auto mark = [&](double x, double y) {
        const double fi = std::floor((x - config.origin.x) / config.cell_length);
        const double fj = std::floor((y - config.origin.y) / config.cell_width);
        if (fi < 0.0 || fj < 0.0 || fi >= static_cast<double>(config.rows) ||
            fj >= static_cast<double>(config.cols)) {
            return;
        }
        const std::size_t c = config.index(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj));
        values[c * AugmentedOccupancyGrid::kAttributes + kOccupied] = 1.0;
    };
    for (std::size_t k = 1; k < line.points.size(); ++k) {
        const Point2 a = line.points[k - 1];
        const Point2 b = line.points[k];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const auto n = static_cast<std::size_t>(std::ceil(len / step));
        for (std::size_t s = 0; s <= n; ++s) {
            const double w = n == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(n);
            mark(a.x + w * (b.x - a.x), a.y + w * (b.y - a.y));
        }
    }
}

} // namespace

AugmentedOccupancyGrid build_aog(const Scenario& scenario, const GridConfig& config,
                                 AogBuildReport* report)
{
    const GridConfig grid = config.with_attributes(AugmentedOccupancyGrid::kAttributes);
    grid.validate();
    check_coverage(scenario.road, grid);
    std::vector<double> values(grid.values(), 0.0);
    for (const auto& line : scenario.road.markings) {
        trace_polyline(line, grid, values);
    }
    for (const auto& p : scenario.participants) {
        p.validate();
        const bool moving = p.kind != ParticipantKind::static_object;
        const std::array<double, 5> attrs = {
            1.0, moving ? p.velocity : 0.0, moving ? p.pose.psi : 0.0,
            moving ? p.accel_x : 0.0, moving ? p.accel_y : 0.0};
        const auto mask = footprint_mask(p.pose, p.footprint, grid);
        for (std::size_t c = 0; c < mask.size(); ++c) {
            if (mask[c] != 0) {
                std::copy(attrs.begin(), attrs.end(),
                          values.begin() + static_cast<std::ptrdiff_t>(c * attrs.size()));
            }
        }
        if (report != nullptr && footprint_clipped(p.pose, p.footprint, grid)) {
            report->clipped_participants.push_back(p.id);
        }
    }
    return AugmentedOccupancyGrid(grid, std::move(values));
}

namespace {

double speed_factor(std::size_t round)
{
    if (round == 0) {
        return 1.0;
    }
    const double step = 0.25 * static_cast<double>((round + 1) / 2);
    return std::max(0.05, (round % 2 == 1) ? 1.0 - step : 1.0 + step);
}

// Arc-length parametrized path: straight run, optional circular arc, straight run.
struct PathShape
{
    double lead = 0.0;     // straight distance before the arc
    double radius = 0.0;   // 0 for no arc
    double turn = 0.0;     // signed heading change over the arc
};

TimedPose pose_along(const Pose& start, const PathShape& path, double s, double t)
{
    const double c0 = std::cos(start.psi);
    const double s0 = std::sin(start.psi);
    if (path.radius <= 0.0 || s <= path.lead) {
        return {t, start.x + s * c0, start.y + s * s0, start.psi};
    }
    const double sign = path.turn >= 0.0 ? 1.0 : -1.0;
    const double arc_len = path.radius * std::abs(path.turn);
    const Point2 p0{start.x + path.lead * c0, start.y + path.lead * s0};
    const Point2 centre{p0.x - sign * path.radius * s0, p0.y + sign * path.radius * c0};
    const double on_arc = std::min(s - path.lead, arc_len);
    const double psi = start.psi + sign * on_arc / path.radius;
    Point2 p{centre.x + sign * path.radius * std::sin(psi),
             centre.y - sign * path.radius * std::cos(psi)};
    const double beyond = s - path.lead - on_arc;
    if (beyond > 0.0) {
        p.x += beyond * std::cos(psi);
        p.y += beyond * std::sin(psi);
    }
    return {t, p.x, p.y, psi};
}

} // namespace

TrajectoryHypothesis rollout_maneuver(const TrafficParticipant& participant,
                                      const RoadLayout& road, Maneuver maneuver,
                                      const HypothesisSettings& settings, double speed_scale)
{
    participant.validate();
    settings.validate();
    require(speed_scale >= 0.0 && std::isfinite(speed_scale), "speed scale must be >= 0");
    const double speed = participant.kind == ParticipantKind::static_object
                             ? 0.0
                             : participant.velocity * speed_scale;
    TrajectoryHypothesis h;
    h.participant = participant.id;
    h.maneuver = maneuver;
    h.speed_scale = speed_scale;
    const auto steps = static_cast<std::size_t>(std::llround(settings.horizon / settings.dt));

    PathShape path;
    if (maneuver == Maneuver::left_turn || maneuver == Maneuver::right_turn) {
        const Arm arm = RoadLayout::approach_arm(participant.pose.psi);
        const double inbound = RoadLayout::inbound_heading(arm);
        const Point2 u = heading_vector(inbound);
        const double to_box = (road.center.x - participant.pose.x) * u.x +
                              (road.center.y - participant.pose.y) * u.y - road.box_half();
        const bool left = maneuver == Maneuver::left_turn;
        path.lead = std::max(0.0, to_box);
        path.radius = road.box_half() + (left ? 0.5 : -0.5) * road.lane_width;
        path.turn = wrap_angle(inbound + (left ? 0.5 : -0.5) * kPi - participant.pose.psi);
    }

    h.poses.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * settings.dt;
        double s = speed * t;
        if (maneuver == Maneuver::brake_to_stop) {
            const double t_stop = speed / settings.brake_decel;
            const double tt = std::min(t, t_stop);
            s = speed * tt - 0.5 * settings.brake_decel * tt * tt;
        }
        h.poses.push_back(pose_along(participant.pose, path, s, t));
    }
    return h;
}

std::vector<TrajectoryHypothesis> generate_hypotheses(const TrafficParticipant& participant,
                                                      const RoadLayout& road,
                                                      const HypothesisSettings& settings)
{
    participant.validate();
    settings.validate();

    std::vector<Maneuver> templates;
    const bool fixed = participant.kind == ParticipantKind::static_object;
    if (fixed || !road.on_road({participant.pose.x, participant.pose.y})) {
        templates = {Maneuver::straight};
    } else {
        templates = road.permitted_at(RoadLayout::approach_arm(participant.pose.psi));
        if (templates.empty()) {
            templates = {Maneuver::straight};
        }
    }

    std::vector<TrajectoryHypothesis> out;
    out.reserve(settings.count);
    double total = 0.0;
    for (std::size_t k = 0; k < settings.count; ++k) {
        const Maneuver m = templates[k % templates.size()];
        out.push_back(rollout_maneuver(participant, road, m, settings,
                                       speed_factor(k / templates.size())));
        out.back().probability = settings.prior[static_cast<std::size_t>(m)];
        total += out.back().probability;
    }
    for (auto& h : out) {
        h.probability = total > 0.0 ? h.probability / total
                                    : 1.0 / static_cast<double>(settings.count);
    }
    return out;
}

std::vector<std::uint8_t> rasterize_hypothesis(const TrajectoryHypothesis& h,
                                               const Footprint& footprint,
                                               const GridConfig& config, double t_pred)
{
    return footprint_mask(h.pose_at(t_pred), footprint, config);
}

PredictedOccupancyGrid compute_ground_truth_pog(const Scenario& scenario,
                                                const GridConfig& config, double t_pred)
{
    const GridConfig grid = config.with_attributes(1);
    grid.validate();
    require(scenario.hypotheses.size() == scenario.participants.size(),
            "scenario needs one hypothesis list per participant");
    std::vector<double> acc(grid.cells(), 0.0);
    for (std::size_t l = 0; l < scenario.participants.size(); ++l) {
        const auto& footprint = scenario.participants[l].footprint;
        for (const auto& h : scenario.hypotheses[l]) {
            const auto mask = rasterize_hypothesis(h, footprint, grid, t_pred);
            for (std::size_t c = 0; c < mask.size(); ++c) {
                if (mask[c] != 0) {
                    acc[c] += h.probability;
                }
            }
        }
    }
    for (auto& p : acc) {
        p = std::min(1.0, p);
    }
    return PredictedOccupancyGrid(grid, t_pred, std::move(acc));
}

void SamplerSettings::validate() const
{
    hypotheses.validate();
    require(position_range >= 0.0 && start_offset >= 0.0, "position ranges must be >= 0");
    require(speed_min_kmh >= 0.0 && speed_max_kmh >= speed_min_kmh, "invalid speed range");
    require(accel_max >= accel_min, "invalid acceleration range");
    require(heading_range_deg >= 0.0, "heading range must be >= 0");
    require(car.length > 0.0 && car.width > 0.0 && bicycle.length > 0.0 && bicycle.width > 0.0,
            "footprints must be positive");
}

Scenario sample_scenario(const RoadLayout& layout, std::uint64_t rng_seed,
                         const SamplerSettings& settings)
{
    settings.validate();
    Rng rng(rng_seed);
    Scenario sc;
    sc.road = layout;
    sc.rng_seed = rng_seed;

    TrafficParticipant ego;
    ego.id = 0;
    ego.kind = ParticipantKind::ego;
    ego.pose = settings.ego_pose;
    ego.velocity = rng.uniform(settings.speed_min_kmh, settings.speed_max_kmh) / 3.6;
    ego.accel_x = rng.uniform(settings.accel_min, settings.accel_max);
    ego.footprint = settings.car;
    sc.participants.push_back(ego);

    std::vector<Arm> arms = {Arm::ahead, Arm::left, Arm::right};
    rng.shuffle(arms);
    const std::array<ParticipantKind, 3> kinds = {ParticipantKind::car, ParticipantKind::car,
                                                  ParticipantKind::bicycle};
    const double half_heading = 0.5 * settings.heading_range_deg * kPi / 180.0;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        TrafficParticipant p;
        p.id = static_cast<int>(k + 1);
        p.kind = kinds[k];
        p.footprint = p.kind == ParticipantKind::bicycle ? settings.bicycle : settings.car;
        const double inbound = RoadLayout::inbound_heading(arms[k]);
        const double d = layout.box_half() + settings.start_offset +
                         rng.uniform(0.0, settings.position_range);
        const Point2 u = heading_vector(inbound);
        const Point2 r = right_of(inbound);
        p.pose.x = layout.center.x - d * u.x + 0.5 * layout.lane_width * r.x;
        p.pose.y = layout.center.y - d * u.y + 0.5 * layout.lane_width * r.y;
        p.pose.psi = wrap_angle(inbound + rng.uniform(-half_heading, half_heading));
        p.velocity = rng.uniform(settings.speed_min_kmh, settings.speed_max_kmh) / 3.6;
        p.accel_x = rng.uniform(settings.accel_min, settings.accel_max);
        sc.participants.push_back(p);
    }

    for (const auto& p : sc.participants) {
        sc.hypotheses.push_back(generate_hypotheses(p, layout, settings.hypotheses));
    }
    sc.validate();
    return sc;
}

std::string_view to_string(ParticipantKind kind)
{
    switch (kind) {
    case ParticipantKind::ego: return "ego";
    case ParticipantKind::car: return "car";
    case ParticipantKind::bicycle: return "bicycle";
    case ParticipantKind::static_object: return "static";
    }
    return "?";
}

std::string_view to_string(Maneuver m)
{
    switch (m) {
    case Maneuver::straight: return "straight";
    case Maneuver::left_turn: return "left";
    case Maneuver::right_turn: return "right";
    case Maneuver::brake_to_stop: return "brake";
    }
    return "?";
}

std::string_view to_string(LayoutKind kind)
{
    switch (kind) {
    case LayoutKind::four_way_open: return "four-way-open";
    case LayoutKind::four_way_left_no_entry: return "four-way-left-no-entry";
    }
    return "?";
}

std::string_view to_string(Arm arm)
{
    switch (arm) {
    case Arm::ego_side: return "ego-side";
    case Arm::ahead: return "ahead";
    case Arm::left: return "left";
    case Arm::right: return "right";
    }
    return "?";
}

ParticipantKind parse_participant_kind(std::string_view s)
{
    for (auto k : {ParticipantKind::ego, ParticipantKind::car, ParticipantKind::bicycle,
                   ParticipantKind::static_object}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw std::invalid_argument("unknown participant kind '" + std::string(s) + "'");
}

Maneuver parse_maneuver(std::string_view s)
{
    for (auto m : kAllManeuvers) {
        if (to_string(m) == s) {
            return m;
        }
    }
    throw std::invalid_argument("unknown maneuver '" + std::string(s) + "'");
}

LayoutKind parse_layout_kind(std::string_view s)
{
    for (auto k : {LayoutKind::four_way_open, LayoutKind::four_way_left_no_entry}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw std::invalid_argument("unknown layout kind '" + std::string(s) + "'");
}

} // namespace pog
