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
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include "pog/errors.hpp"
#include "pog/rng.hpp"
#include "pog/scenario.hpp"
#include "pog/scenario_io.hpp"
#include "support.hpp"

namespace pog {
namespace {

constexpr double kPi = std::numbers::pi;

// Corner polygon, counter-clockwise.
std::array<Point2, 4> corners(const Pose& pose, const Footprint& f)
{
    const double c = std::cos(pose.psi);
    const double s = std::sin(pose.psi);
    std::array<Point2, 4> out;
    const double a[4] = {0.5, -0.5, -0.5, 0.5};
    const double b[4] = {0.5, 0.5, -0.5, -0.5};
    for (int k = 0; k < 4; ++k) {
        const double u = a[k] * f.length;
        const double v = b[k] * f.width;
        out[k] = {pose.x + u * c - v * s, pose.y + u * s + v * c};
    }
    return out;
}

// Point in a convex polygon: on the left of (or on) every edge.
bool inside(const std::array<Point2, 4>& poly, Point2 p)
{
    for (int k = 0; k < 4; ++k) {
        const Point2 a = poly[k];
        const Point2 b = poly[(k + 1) % 4];
        const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (cross < 0.0) {
            return false;
        }
    }
    return true;
}

TrajectoryHypothesis fixed_hypothesis(int participant, std::vector<TimedPose> poses, double prob)
{
    TrajectoryHypothesis h;
    h.participant = participant;
    h.poses = std::move(poses);
    h.probability = prob;
    return h;
}

// Same number in every random scenario test below: participants in [1, 4],
// hypotheses in [1, 5], all poses within a few metres of the 20 x 20 m grid.
Scenario random_scenario(Rng& rng, double t_pred)
{
    Scenario sc;
    sc.road = RoadLayout::make(LayoutKind::four_way_open, 20.0, 20.0, 3.5);
    const std::size_t n = 1 + rng.below(4);
    for (std::size_t l = 0; l < n; ++l) {
        TrafficParticipant p;
        p.id = static_cast<int>(l);
        p.kind = l == 0 ? ParticipantKind::ego : ParticipantKind::car;
        p.footprint = {rng.uniform(0.5, 5.0), rng.uniform(0.5, 2.5)};
        sc.participants.push_back(p);
        const std::size_t m = 1 + rng.below(5);
        std::vector<double> w(m);
        double total = 0.0;
        for (auto& x : w) {
            x = rng.uniform(0.05, 1.0);
            total += x;
        }
        std::vector<TrajectoryHypothesis> hs;
        for (std::size_t s = 0; s < m; ++s) {
            std::vector<TimedPose> poses;
            for (double t : {0.0, 0.5 * t_pred, t_pred}) {
                poses.push_back({t, rng.uniform(-3.0, 23.0), rng.uniform(-13.0, 13.0),
                                 rng.uniform(-kPi, kPi)});
            }
            hs.push_back(fixed_hypothesis(p.id, poses, w[s] / total));
        }
        sc.hypotheses.push_back(hs);
    }
    return sc;
}

TEST(Footprint, MaskMatchesPointInPolygon)
{
    Rng rng(77);
    auto grid = test::small_grid(25, 30, 0.5);
    grid.origin = {-1.0, -7.5};
    for (int trial = 0; trial < 300; ++trial) {
        const Pose pose{rng.uniform(-3.0, 14.0), rng.uniform(-10.0, 10.0), rng.uniform(-4.0, 4.0)};
        const Footprint f{rng.uniform(0.3, 6.0), rng.uniform(0.3, 3.0)};
        const auto mask = footprint_mask(pose, f, grid);
        const auto poly = corners(pose, f);
        for (std::size_t i = 0; i < grid.rows; ++i) {
            for (std::size_t j = 0; j < grid.cols; ++j) {
                ASSERT_EQ(mask[grid.index(i, j)] != 0, inside(poly, grid.cell_center(i, j)))
                    << "trial " << trial << " cell " << i << "," << j;
            }
        }
    }
}

TEST(Footprint, AreaConvergesToRectangle)
{
    const auto grid = test::small_grid(400, 400, 0.05);
    const Pose pose{10.0, 10.0, 0.6};
    const Footprint f{4.0, 1.8};
    const auto mask = footprint_mask(pose, f, grid);
    const double area = 0.05 * 0.05 * static_cast<double>(std::count(mask.begin(), mask.end(), 1));
    EXPECT_NEAR(area, 4.0 * 1.8, 0.1);
}

TEST(Footprint, BoundaryCentersAreInside)
{
    // Axis-aligned 2 x 1 box whose edges pass exactly through cell centres.
    const auto grid = test::small_grid(6, 6, 1.0);
    const auto mask = footprint_mask({2.5, 2.5, 0.0}, {2.0, 2.0}, grid);
    std::size_t n = std::count(mask.begin(), mask.end(), 1);
    EXPECT_EQ(n, 9u);
    EXPECT_EQ(mask[grid.index(1, 1)], 1);
    EXPECT_EQ(mask[grid.index(3, 3)], 1);
}

TEST(Footprint, OffGridIsEmptyAndClipped)
{
    const auto grid = test::small_grid(10, 10, 1.0);
    const auto mask = footprint_mask({-20.0, 3.0, 0.0}, {4.0, 1.8}, grid);
    EXPECT_EQ(std::count(mask.begin(), mask.end(), 1), 0);
    EXPECT_TRUE(footprint_clipped({0.5, 5.0, 0.0}, {4.0, 1.8}, grid));
    EXPECT_FALSE(footprint_clipped({5.0, 5.0, 0.3}, {4.0, 1.8}, grid));
}

TEST(GroundTruth, MatchesTripleLoop)
{
    Rng rng(101);
    GridConfig grid = test::small_grid(20, 20, 1.0);
    grid.origin = {0.0, -8.25};
    for (int trial = 0; trial < 50; ++trial) {
        const auto sc = random_scenario(rng, 1.0);
        const auto pog = compute_ground_truth_pog(sc, grid, 1.0);
        for (std::size_t i = 0; i < grid.rows; ++i) {
            for (std::size_t j = 0; j < grid.cols; ++j) {
                double sum = 0.0;
                for (std::size_t l = 0; l < sc.participants.size(); ++l) {
                    for (const auto& h : sc.hypotheses[l]) {
                        const auto& last = h.poses.back();
                        const auto poly = corners({last.x, last.y, last.psi},
                                                  sc.participants[l].footprint);
                        if (inside(poly, grid.cell_center(i, j))) {
                            sum += h.probability;
                        }
                    }
                }
                ASSERT_EQ(pog.at(i, j), std::min(1.0, sum));
            }
        }
    }
}

TEST(GroundTruth, ProbabilitiesStayInUnitInterval)
{
    Rng rng(5);
    const auto layout = RoadLayout::make(LayoutKind::four_way_open, 20.0, 20.0, 3.5);
    const auto grid = grid_for_layout(layout, 1.0);
    for (int k = 0; k < 30; ++k) {
        const auto sc = sample_scenario(layout, rng.next());
        const auto pog = compute_ground_truth_pog(sc, grid, 1.0);
        for (double p : pog.probs()) {
            ASSERT_GE(p, 0.0);
            ASSERT_LE(p, 1.0);
        }
    }
}

TEST(GroundTruth, SingleCertainHypothesisIsItsFootprint)
{
    Scenario sc;
    sc.road = RoadLayout::make(LayoutKind::four_way_open, 10.0, 10.0, 2.0);
    TrafficParticipant p;
    p.kind = ParticipantKind::ego;
    p.footprint = {2.0, 1.0};
    sc.participants = {p};
    sc.hypotheses = {{fixed_hypothesis(0, {{0.0, 1.0, 1.0, 0.0}, {1.0, 5.0, 1.0, 0.0}}, 1.0)}};
    const auto grid = test::small_grid(10, 10, 1.0);
    const auto pog = compute_ground_truth_pog(sc, grid, 0.5);
    const auto mask = footprint_mask({3.0, 1.0, 0.0}, p.footprint, grid);
    for (std::size_t c = 0; c < grid.cells(); ++c) {
        EXPECT_EQ(pog.probs()[c], mask[c] != 0 ? 1.0 : 0.0);
    }
}

TEST(Hypotheses, PoseInterpolation)
{
    auto h = fixed_hypothesis(0, {{0.0, 0.0, 0.0, 0.0}, {1.0, 2.0, 4.0, 1.0}}, 1.0);
    const auto p = h.pose_at(0.25);
    EXPECT_DOUBLE_EQ(p.x, 0.5);
    EXPECT_DOUBLE_EQ(p.y, 1.0);
    EXPECT_DOUBLE_EQ(p.psi, 0.25);
    EXPECT_THROW(h.pose_at(1.5), std::invalid_argument);
    EXPECT_THROW(h.pose_at(-0.1), std::invalid_argument);
}

TEST(Hypotheses, GeneratedSetsAreNormalized)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_open);
    Rng rng(8);
    for (std::size_t count : {1u, 3u, 4u, 7u}) {
        HypothesisSettings hs;
        hs.count = count;
        for (int k = 0; k < 20; ++k) {
            const auto sc = sample_scenario(road, rng.next(), SamplerSettings{hs});
            for (std::size_t l = 0; l < sc.participants.size(); ++l) {
                const auto& list = sc.hypotheses[l];
                ASSERT_EQ(list.size(), count);
                double total = 0.0;
                for (const auto& h : list) {
                    total += h.probability;
                    ASSERT_EQ(h.poses.size(), 11u);
                    EXPECT_EQ(h.poses.front().x, sc.participants[l].pose.x);
                    EXPECT_EQ(h.poses.front().y, sc.participants[l].pose.y);
                    EXPECT_NEAR(h.poses.back().t, 1.0, 1e-12);
                }
                EXPECT_NEAR(total, 1.0, 1e-12);
            }
        }
    }
}

TEST(Hypotheses, ManeuverKinematics)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_open);
    TrafficParticipant p;
    p.kind = ParticipantKind::car;
    p.pose = {road.center.x - 15.0, road.center.y - 0.5 * road.lane_width, 0.0};
    p.velocity = 8.0;
    HypothesisSettings hs;
    hs.horizon = 3.0;

    const auto straight = rollout_maneuver(p, road, Maneuver::straight, hs);
    EXPECT_NEAR(straight.poses.back().x, p.pose.x + 24.0, 1e-9);
    EXPECT_NEAR(straight.poses.back().y, p.pose.y, 1e-12);

    const auto brake = rollout_maneuver(p, road, Maneuver::brake_to_stop, hs);
    // v^2 / (2 a) = 64 / 8 = 8 m, reached at t = 2 s and held.
    EXPECT_NEAR(brake.pose_at(2.0).x, p.pose.x + 8.0, 1e-9);
    EXPECT_NEAR(brake.poses.back().x, p.pose.x + 8.0, 1e-9);

    const auto left = rollout_maneuver(p, road, Maneuver::left_turn, hs);
    const auto right = rollout_maneuver(p, road, Maneuver::right_turn, hs);
    EXPECT_GT(left.poses.back().psi, 0.5);
    EXPECT_LT(right.poses.back().psi, -0.5);
    EXPECT_GT(left.poses.back().y, p.pose.y);
    EXPECT_LT(right.poses.back().y, p.pose.y);
    // The path length is speed * time whatever the shape.
    double len = 0.0;
    for (std::size_t k = 1; k < left.poses.size(); ++k) {
        len += std::hypot(left.poses[k].x - left.poses[k - 1].x,
                          left.poses[k].y - left.poses[k - 1].y);
    }
    EXPECT_NEAR(len, 24.0, 0.05);
}

TEST(Hypotheses, NoEntryLayoutSkipsLeftArm)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_left_no_entry);
    for (Arm arm : kAllArms) {
        for (Maneuver m : road.permitted_at(arm)) {
            if (m != Maneuver::brake_to_stop) {
                EXPECT_NE(RoadLayout::exit_arm(arm, m), Arm::left);
            }
        }
    }
    EXPECT_EQ(road.permitted_at(Arm::ego_side).size(), 3u);
    const auto open = RoadLayout::make(LayoutKind::four_way_open);
    EXPECT_EQ(open.permitted_at(Arm::ego_side).size(), 4u);
    EXPECT_GT(road.markings.size(), open.markings.size());
}

TEST(Sampler, DeterministicAndWithinRanges)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_open, 20.0, 20.0, 3.5);
    SamplerSettings s;
    s.position_range = 4.0;
    const auto a = sample_scenario(road, 1234, s);
    const auto b = sample_scenario(road, 1234, s);
    ASSERT_EQ(a.participants.size(), 4u);
    for (std::size_t l = 0; l < 4; ++l) {
        EXPECT_EQ(a.participants[l].pose.x, b.participants[l].pose.x);
        EXPECT_EQ(a.participants[l].velocity, b.participants[l].velocity);
    }
    EXPECT_NE(sample_scenario(road, 1235, s).participants[1].velocity, a.participants[1].velocity);

    Rng rng(3);
    std::multiset<ParticipantKind> kinds;
    std::set<Arm> arms;
    double speed_sum = 0.0;
    int speeds = 0;
    for (int k = 0; k < 200; ++k) {
        const auto sc = sample_scenario(road, rng.next(), s);
        EXPECT_NO_THROW(sc.validate());
        kinds.clear();
        arms.clear();
        for (const auto& p : sc.participants) {
            kinds.insert(p.kind);
            const double kmh = p.velocity * 3.6;
            EXPECT_GE(kmh, s.speed_min_kmh - 1e-9);
            EXPECT_LE(kmh, s.speed_max_kmh + 1e-9);
            EXPECT_GE(p.accel_x, s.accel_min);
            EXPECT_LE(p.accel_x, s.accel_max);
            speed_sum += kmh;
            ++speeds;
            if (p.kind != ParticipantKind::ego) {
                arms.insert(RoadLayout::approach_arm(p.pose.psi));
                const double dist = std::hypot(p.pose.x - road.center.x, p.pose.y - road.center.y);
                EXPECT_LE(dist, road.box_half() + s.start_offset + s.position_range +
                                    road.lane_width);
            }
        }
        EXPECT_EQ(kinds.count(ParticipantKind::ego), 1u);
        EXPECT_EQ(kinds.count(ParticipantKind::car), 2u);
        EXPECT_EQ(kinds.count(ParticipantKind::bicycle), 1u);
        EXPECT_EQ(arms.size(), 3u);
        EXPECT_EQ(arms.count(Arm::ego_side), 0u);
    }
    EXPECT_NEAR(speed_sum / speeds, 22.5, 1.5);
}

TEST(Aog, ParticipantAttributesAndMarkings)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_open, 20.0, 20.0, 3.5);
    const auto grid = grid_for_layout(road, 1.0);
    Scenario sc;
    sc.road = road;
    TrafficParticipant ego;
    ego.kind = ParticipantKind::ego;
    ego.pose = {2.5, 0.0, 0.0};
    ego.velocity = 5.0;
    ego.accel_x = 1.5;
    TrafficParticipant cone;
    cone.id = 1;
    cone.kind = ParticipantKind::static_object;
    cone.pose = {15.5, -6.0, 0.0};
    cone.velocity = 3.0;
    cone.footprint = {1.0, 1.0};
    sc.participants = {ego, cone};
    sc.hypotheses = {generate_hypotheses(ego, road, {}), generate_hypotheses(cone, road, {})};

    AogBuildReport report;
    const auto aog = build_aog(sc, grid, &report);
    EXPECT_EQ(aog.config().attributes, 5u);
    const auto ego_mask = footprint_mask(ego.pose, ego.footprint, grid);
    std::size_t marked = 0;
    for (std::size_t i = 0; i < grid.rows; ++i) {
        for (std::size_t j = 0; j < grid.cols; ++j) {
            const auto c = aog.cell(i, j);
            if (ego_mask[grid.index(i, j)] != 0) {
                EXPECT_EQ(c[kOccupied], 1.0);
                EXPECT_EQ(c[kVelocity], 5.0);
                EXPECT_EQ(c[kAccelLongitudinal], 1.5);
            } else if (c[kOccupied] == 1.0 && c[kVelocity] == 0.0) {
                ++marked;
            }
        }
    }
    EXPECT_GT(marked, 20u);
    const auto cone_mask = footprint_mask(cone.pose, cone.footprint, grid);
    for (std::size_t c = 0; c < cone_mask.size(); ++c) {
        if (cone_mask[c] != 0) {
            EXPECT_EQ(aog.values()[c * 5 + kOccupied], 1.0);
            EXPECT_EQ(aog.values()[c * 5 + kVelocity], 0.0);
        }
    }
    // The ego starts with its rear at x = 0.5, inside the grid.
    EXPECT_TRUE(report.clipped_participants.empty());
}

TEST(Aog, RejectsGridNotCoveringLayout)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_open, 20.0, 20.0, 3.5);
    Scenario sc = sample_scenario(road, 1);
    EXPECT_THROW(build_aog(sc, test::small_grid(10, 10, 1.0)), std::invalid_argument);
}

TEST(ScenarioValidation, RejectsBadProbabilities)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_open, 20.0, 20.0, 3.5);
    Scenario sc = sample_scenario(road, 7);
    sc.hypotheses[1][0].probability += 0.1;
    EXPECT_THROW(sc.validate(), std::invalid_argument);
    sc = sample_scenario(road, 7);
    sc.participants[2].kind = ParticipantKind::ego;
    EXPECT_THROW(sc.validate(), std::invalid_argument);
}

TEST(ScenarioFiles, RoundTripPreservesGroundTruth)
{
    const auto road = RoadLayout::make(LayoutKind::four_way_left_no_entry, 20.0, 20.0, 3.5);
    const auto grid = grid_for_layout(road, 1.0);
    const auto sc = sample_scenario(road, 99);
    const auto text = dump_scenario(sc, {});
    const auto back = parse_scenario(text);
    ASSERT_EQ(back.participants.size(), sc.participants.size());
    EXPECT_EQ(back.road.kind, sc.road.kind);
    EXPECT_EQ(compute_ground_truth_pog(back, grid, 1.0), compute_ground_truth_pog(sc, grid, 1.0));
    EXPECT_EQ(dump_scenario(back, {}), text);
}

TEST(ScenarioFiles, GeneratesMissingHypotheses)
{
    const std::string doc = R"({
      "version": 1, "seed": 3,
      "layout": {"kind": "four-way-open", "extent": [20, 20], "lane_width": 3.5},
      "hypotheses": {"count": 2, "horizon": 1.0, "dt": 0.1},
      "participants": [
        {"id": 0, "kind": "ego", "pose": [2.5, 0, 0], "velocity": 5},
        {"id": 1, "kind": "car", "pose": [18, 1.75, 3.14159], "velocity": 6,
         "hypotheses": [{"maneuver": "straight", "probability": 0.25},
                        {"maneuver": "brake", "probability": 0.75}]}
      ]
    })";
    const auto sc = parse_scenario(doc);
    ASSERT_EQ(sc.hypotheses.size(), 2u);
    EXPECT_EQ(sc.hypotheses[0].size(), 2u);
    ASSERT_EQ(sc.hypotheses[1].size(), 2u);
    EXPECT_EQ(sc.hypotheses[1][1].maneuver, Maneuver::brake_to_stop);
    EXPECT_EQ(sc.hypotheses[1][1].probability, 0.75);
}

TEST(ScenarioFiles, MalformedDocumentsAreDataErrors)
{
    EXPECT_THROW(parse_scenario("{not json"), DataError);
    EXPECT_THROW(parse_scenario(R"({"version": 2, "participants": []})"), DataError);
    EXPECT_THROW(parse_scenario(R"({"version": 1, "participants": [{"kind": "tram"}]})"),
                 DataError);
}

} // namespace
} // namespace pog
