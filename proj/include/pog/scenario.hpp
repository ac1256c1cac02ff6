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

#ifndef POG_SCENARIO_HPP
#define POG_SCENARIO_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pog/grid.hpp"

namespace pog {

enum class ParticipantKind { ego, car, bicycle, static_object };

struct Pose
{
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;  // heading, rad, counter-clockwise from +x
};

struct Footprint
{
    double length = 4.0;
    double width = 1.8;
};

struct TrafficParticipant
{
    int id = 0;
    ParticipantKind kind = ParticipantKind::car;
    Pose pose;
    double velocity = 0.0;        // m/s
    double accel_x = 0.0;         // longitudinal, m/s^2
    double accel_y = 0.0;         // lateral, m/s^2
    Footprint footprint;

    void validate() const;
};

enum class Maneuver { straight, left_turn, right_turn, brake_to_stop };
inline constexpr std::array<Maneuver, 4> kAllManeuvers = {
    Maneuver::straight, Maneuver::left_turn, Maneuver::right_turn, Maneuver::brake_to_stop};

struct TimedPose
{
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
};

/// One candidate future of one participant. Headings along `poses` are
/// unwrapped (continuous), so linear interpolation between samples is safe.
struct TrajectoryHypothesis
{
    int participant = 0;
    Maneuver maneuver = Maneuver::straight;
    std::vector<TimedPose> poses;
    double probability = 1.0;
    double speed_scale = 1.0;  // factor on the participant's speed used for the rollout

    void validate() const;
    /* Linear interpolation in position and heading; throws outside [t0, t_end] */
    Pose pose_at(double t) const;
};

enum class LayoutKind { four_way_open, four_way_left_no_entry };

/// Approach arms named from the ego's point of view.
enum class Arm { ego_side, ahead, left, right };
inline constexpr std::array<Arm, 4> kAllArms = {Arm::ego_side, Arm::ahead, Arm::left, Arm::right};

struct Polyline
{
    std::vector<Point2> points;
};

/// Four-way intersection of two-lane roads (right-hand traffic) in the ego
/// frame. The covered area is x in [0, extent_x] and y centred on the
/// intersection; the ego drives along y = 0 in the right lane of the ego-side arm.
struct RoadLayout
{
    LayoutKind kind = LayoutKind::four_way_open;
    double extent_x = 40.0;
    double extent_y = 40.0;
    double lane_width = 3.5;
    Point2 center;
    std::vector<Polyline> markings;
    std::array<std::vector<Maneuver>, 4> permitted;  // indexed by Arm

    static RoadLayout make(LayoutKind kind, double extent_x = 40.0, double extent_y = 40.0,
                           double lane_width = 3.5);

    void validate() const;

    /* Half size of the square junction box */
    double box_half() const { return lane_width; }
    double min_y() const { return center.y - 0.5 * extent_y; }
    const std::vector<Maneuver>& permitted_at(Arm arm) const
    { return permitted[static_cast<std::size_t>(arm)]; }
    /* True when the point lies on the carriageway of an arm or inside the junction */
    bool on_road(Point2 p) const;
    /* Arm a participant heading along psi approaches from */
    static Arm approach_arm(double psi);
    /* Unit heading of traffic entering the junction from an arm */
    static double inbound_heading(Arm arm);
    /* Arm a maneuver from `from` exits into */
    static Arm exit_arm(Arm from, Maneuver m);
};

/// Grid that exactly covers a layout's extent at the given cell size.
GridConfig grid_for_layout(const RoadLayout& layout, double cell_size, std::size_t attributes = 1);

struct HypothesisSettings
{
    std::size_t count = 3;           // S
    double horizon = 1.0;            // s
    double dt = 0.1;                 // s
    double brake_decel = 4.0;        // m/s^2 for brake-to-stop
    // Prior weight per maneuver in kAllManeuvers order; normalized over the
    // hypotheses actually generated.
    std::array<double, 4> prior = {1.0, 1.0, 1.0, 1.0};

    void validate() const;
};

struct Scenario
{
    RoadLayout road;
    std::vector<TrafficParticipant> participants;
    std::vector<std::vector<TrajectoryHypothesis>> hypotheses;  // parallel to participants
    std::uint64_t rng_seed = 0;

    /* Exactly one ego, hypothesis probabilities sum to 1 per participant (1e-9) */
    void validate() const;
};

/// Cells whose centre lies inside the oriented footprint rectangle (boundary
/// included). Flat row-major mask of size config.cells().
std::vector<std::uint8_t> footprint_mask(const Pose& pose, const Footprint& footprint,
                                         const GridConfig& config);

/* True when any corner of the footprint lies outside the grid area */
bool footprint_clipped(const Pose& pose, const Footprint& footprint, const GridConfig& config);

struct AogBuildReport
{
    std::vector<int> clipped_participants;
};

/// Lane markings as [1, 0, 0, 0, 0], then every participant's footprint as
/// [1, v, psi, a_x, a_y] (later participants overwrite earlier ones).
AugmentedOccupancyGrid build_aog(const Scenario& scenario, const GridConfig& config,
                                 AogBuildReport* report = nullptr);

/// `count` rollouts of the maneuvers permitted on the participant's approach arm,
/// taken in the order straight, left, right, brake. Beyond the number of
/// permitted maneuvers the list repeats with scaled speeds (x0.75, x1.25, x0.5, ...).
/// Off-road participants and static objects only get straight rollouts.
std::vector<TrajectoryHypothesis> generate_hypotheses(const TrafficParticipant& participant,
                                                      const RoadLayout& road,
                                                      const HypothesisSettings& settings);

/* Kinematic rollout of one maneuver over [0, horizon]; probability is left at 1 */
TrajectoryHypothesis rollout_maneuver(const TrafficParticipant& participant,
                                      const RoadLayout& road, Maneuver maneuver,
                                      const HypothesisSettings& settings,
                                      double speed_scale = 1.0);

std::vector<std::uint8_t> rasterize_hypothesis(const TrajectoryHypothesis& h,
                                               const Footprint& footprint,
                                               const GridConfig& config, double t_pred);

/// p(i,j) = min(1, sum over participants and hypotheses of mask * probability).
PredictedOccupancyGrid compute_ground_truth_pog(const Scenario& scenario,
                                                const GridConfig& config, double t_pred);

struct SamplerSettings
{
    HypothesisSettings hypotheses;
    double position_range = 10.0;    // m, jitter of the start distance along the arm
    double start_offset = 2.0;       // m, closest start beyond the junction box edge
    double speed_min_kmh = 10.0;
    double speed_max_kmh = 35.0;
    double heading_range_deg = 60.0;
    double accel_min = 0.0;
    double accel_max = 4.0;
    Footprint car{4.0, 1.8};
    Footprint bicycle{1.8, 0.6};
    Pose ego_pose{2.5, 0.0, 0.0};

    void validate() const;
};

/// Ego plus two cars and one bicyclist, assigned to the three non-ego arms in a
/// random order. Deterministic for a given seed.
Scenario sample_scenario(const RoadLayout& layout, std::uint64_t rng_seed,
                         const SamplerSettings& settings = {});

std::string_view to_string(ParticipantKind kind);
std::string_view to_string(Maneuver m);
std::string_view to_string(LayoutKind kind);
std::string_view to_string(Arm arm);
ParticipantKind parse_participant_kind(std::string_view s);
Maneuver parse_maneuver(std::string_view s);
LayoutKind parse_layout_kind(std::string_view s);

} // namespace pog

#endif // POG_SCENARIO_HPP
