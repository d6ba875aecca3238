#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hca/detection.hpp"
#include "hca/errors.hpp"

namespace hca {
namespace {

const VehicleParams kParams{};
const RegionConfig kRegions{};

NeighborSnapshot neighbor(int id, UavState s, int sequence_length = 0) {
    NeighborSnapshot n;
    n.id = id;
    n.state = s;
    n.velocity = velocity_of(s, kParams);
    if (sequence_length > 0) {
        n.sequence = PlannedSequence{id, 0, std::vector<double>(static_cast<std::size_t>(sequence_length), 0.0)};
    }
    return n;
}

Obstacle static_obstacle(int id, Vec2 p, double radius) {
    Obstacle o;
    o.id = id;
    o.position = p;
    o.radius = radius;
    return o;
}

// Closed-form constant-velocity minimum separation over [0, horizon].
double closest_approach(Vec2 rel_p, Vec2 rel_v, double horizon) {
    const double vv = rel_v.squared_norm();
    const double t = vv > 0.0 ? std::clamp(-dot(rel_p, rel_v) / vv, 0.0, horizon) : 0.0;
    return (rel_p + rel_v * t).norm();
}

ReferencePath straight(Vec2 a, Vec2 b) {
    std::vector<Vec2> pts;
    const int n = static_cast<int>(std::ceil(distance(a, b)));
    for (int i = 0; i <= n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
    return ReferencePath(std::move(pts), false);
}

TEST(ClassifyRegion, Examples) {
    EXPECT_EQ(classify_region(60, kRegions), Region::middle);
    EXPECT_EQ(classify_region(30, kRegions), Region::collision);
    EXPECT_EQ(classify_region(55, kRegions), Region::inner);
    EXPECT_EQ(classify_region(55.0001, kRegions), Region::middle);
    EXPECT_EQ(classify_region(70, kRegions), Region::middle);
    EXPECT_EQ(classify_region(70.0001, kRegions), Region::outer);
    EXPECT_EQ(classify_region(80, kRegions), Region::outer);
    EXPECT_EQ(classify_region(80.5, kRegions), Region::clear);
    EXPECT_THROW(classify_region(-1.0, kRegions), GeometryError);
}

TEST(ClassifyRegion, LayersPartitionTheConflictArea) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(30.0, 80.0);
    for (int i = 0; i < 10000; ++i) {
        double d = u(rng);
        if (d == 30.0) continue;
        const Region r = classify_region(d, kRegions);
        const int hits = (r == Region::inner) + (r == Region::middle) + (r == Region::outer);
        EXPECT_EQ(hits, 1) << d;
    }
}

TEST(RegionConfig, Validation) {
    EXPECT_NO_THROW(kRegions.validate());
    RegionConfig bad;
    bad.inner_radius = 75.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(DetectInner, HeadOnPair) {
    AugmentedObstacleSet set;
    set.neighbors.push_back(neighbor(1, {50, 0, std::numbers::pi}));
    const InnerDetection r = detect_inner({0, 0, 0}, set, kRegions, kParams);
    ASSERT_TRUE(r.flag);
    ASSERT_EQ(r.threats.size(), 1u);
    EXPECT_NEAR(r.threats[0].time_to_min, 50.0 / 38.0, 1e-9);
    EXPECT_NEAR(r.threats[0].min_separation, 0.0, 1e-9);
}

TEST(DetectInner, ParallelPairIsClear) {
    AugmentedObstacleSet set;
    set.neighbors.push_back(neighbor(1, {0, 50, 0}));
    EXPECT_FALSE(detect_inner({0, 0, 0}, set, kRegions, kParams).flag);
}

TEST(DetectInner, OutsideInnerLayerIsClear) {
    AugmentedObstacleSet set;
    set.neighbors.push_back(neighbor(1, {65, 0, std::numbers::pi}));
    EXPECT_FALSE(detect_inner({0, 0, 0}, set, kRegions, kParams).flag);
}

TEST(DetectInner, NoFalseNegativesAgainstClosedForm) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> range(30.5, 55.0);
    int conflicts = 0;
    for (int i = 0; i < 20000; ++i) {
        const double bearing = angle(rng);
        const double d = range(rng);
        const UavState own{0, 0, angle(rng)};
        const UavState other{d * std::cos(bearing), d * std::sin(bearing), angle(rng)};
        AugmentedObstacleSet set;
        set.neighbors.push_back(neighbor(1, other));
        const Vec2 rel_v = velocity_of(other, kParams) - velocity_of(own, kParams);
        const double truth = closest_approach(other.position(), rel_v, kRegions.warning_time);
        if (truth <= kRegions.safe_radius) {
            ++conflicts;
            EXPECT_TRUE(detect_inner(own, set, kRegions, kParams).flag);
        }
    }
    EXPECT_GT(conflicts, 100);
}

TEST(DetectInner, SortedByTimeToMinimum) {
    AugmentedObstacleSet set;
    set.neighbors.push_back(neighbor(1, {54, 0, std::numbers::pi}));
    set.neighbors.push_back(neighbor(2, {40, 0, std::numbers::pi}));
    const InnerDetection r = detect_inner({0, 0, 0}, set, kRegions, kParams);
    ASSERT_EQ(r.threats.size(), 2u);
    EXPECT_EQ(r.threats[0].id, 2);
    EXPECT_LE(r.threats[0].time_to_min, r.threats[1].time_to_min);
}

struct CrossingResult {
    int first_middle{-1};
    int first_inner{-1};
};

// Two UAVs on perpendicular straight legs; `delay` cycles offsets B's arrival.
CrossingResult crossing(int delay, double margin) {
    RegionConfig regions = kRegions;
    regions.middle_margin = margin;
    const int horizon = 20;
    const std::vector<double> zeros(horizon, 0.0);
    CrossingResult out;
    for (int k = 0; k < 200; ++k) {
        const UavState a{-150.0 + 1.9 * k, 0.0, 0.0};
        const UavState b{0.0, -150.0 - 1.9 * delay + 1.9 * k, std::numbers::pi / 2};
        AugmentedObstacleSet set;
        set.neighbors.push_back(neighbor(1, b, horizon + 1));
        const auto predictions = predict_threats(set, kParams, horizon);
        const auto own = rollout(a, zeros, kParams);
        if (out.first_middle < 0 && detect_middle(a, own, predictions, regions, kParams).flag) {
            out.first_middle = k;
        }
        if (out.first_inner < 0 && detect_inner(a, set, regions, kParams).flag) {
            out.first_inner = k;
        }
    }
    return out;
}

TEST(DetectMiddle, CoArrivalFiresBeforeInner) {
    const CrossingResult r = crossing(0, kRegions.middle_margin);
    ASSERT_GE(r.first_middle, 0);
    ASSERT_GE(r.first_inner, 0);
    EXPECT_LT(r.first_middle, r.first_inner);
}

TEST(DetectMiddle, OffsetArrivalIsClear) {
    const CrossingResult r = crossing(100, kRegions.middle_margin);
    EXPECT_EQ(r.first_middle, -1);
}

TEST(DetectMiddle, NeverLaterThanInnerAcrossOffsets) {
    for (int delay = -12; delay <= 12; ++delay) {
        const CrossingResult r = crossing(delay, kRegions.middle_margin);
        if (r.first_inner >= 0) {
            ASSERT_GE(r.first_middle, 0) << "delay " << delay;
            EXPECT_LE(r.first_middle, r.first_inner) << "delay " << delay;
        }
    }
}

TEST(DetectMiddle, LargerMarginKeepsFlag) {
    for (int delay = -20; delay <= 20; delay += 2) {
        const CrossingResult tight = crossing(delay, 5.0);
        const CrossingResult wide = crossing(delay, 15.0);
        if (tight.first_middle >= 0) {
            ASSERT_GE(wide.first_middle, 0);
            EXPECT_LE(wide.first_middle, tight.first_middle);
        }
    }
}

TEST(DetectMiddle, EmptySetIsClear) {
    const std::vector<double> zeros(20, 0.0);
    EXPECT_FALSE(detect_middle({}, rollout({}, zeros, kParams), {}, kRegions, kParams).flag);
}

TEST(PredictThreats, SequenceSkipsAppliedInput) {
    AugmentedObstacleSet set;
    NeighborSnapshot n = neighbor(1, {0, 0, 0});
    n.sequence = PlannedSequence{1, 0, {0.6, 0.0, 0.0, 0.0}};
    set.neighbors.push_back(n);
    const auto preds = predict_threats(set, kParams, 20);
    ASSERT_EQ(preds.size(), 1u);
    ASSERT_EQ(preds[0].positions.size(), 3u);
    EXPECT_NEAR(preds[0].positions[2].x, 5.7, 1e-12);
}

TEST(PredictThreats, FallsBackToLookaheadThenConstantVelocity) {
    AugmentedObstacleSet set;
    NeighborSnapshot with_ref = neighbor(1, {0, 0, 0});
    with_ref.lookahead = std::vector<Vec2>{{1, 1}, {2, 2}};
    set.neighbors.push_back(with_ref);
    set.neighbors.push_back(neighbor(2, {0, 0, 0}));
    Obstacle mover = static_obstacle(9, {10, 0}, 1.0);
    mover.motion = MotionClass::dynamic_object;
    mover.velocity = {0, 5};
    set.sensed.push_back(mover);
    const auto preds = predict_threats(set, kParams, 5);
    ASSERT_EQ(preds.size(), 3u);
    EXPECT_EQ(preds[0].positions.size(), 2u);
    EXPECT_EQ(preds[1].positions.size(), 5u);
    EXPECT_NEAR(preds[1].positions[4].x, 9.5, 1e-12);
    EXPECT_NEAR(preds[2].positions[1].y, 1.0, 1e-12);
    EXPECT_EQ(preds[2].radius, 1.0);
}

TEST(DetectOuter, OnPathObstacleAhead) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    // Separation 75 m, inside the outer layer.
    const std::vector<Obstacle> sensed{static_obstacle(5, {80, 0}, 5.0)};
    const OuterDetection r = detect_outer({0, 0, 0}, path, sensed, kRegions);
    ASSERT_TRUE(r.flag);
    EXPECT_EQ(r.blocker->id, 5);
}

TEST(DetectOuter, LateralOffsetIsClear) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    const std::vector<Obstacle> sensed{static_obstacle(5, {45, 60}, 5.0)};
    EXPECT_FALSE(detect_outer({0, 0, 0}, path, sensed, kRegions).flag);
}

TEST(DetectOuter, BehindIsClear) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    const std::vector<Obstacle> sensed{static_obstacle(5, {125, 0}, 5.0)};
    EXPECT_FALSE(detect_outer({200, 0, 0}, path, sensed, kRegions).flag);
}

TEST(DetectOuter, MoversIgnored) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    Obstacle mover = static_obstacle(5, {80, 0}, 5.0);
    mover.motion = MotionClass::dynamic_object;
    mover.velocity = {0, 3};
    EXPECT_FALSE(detect_outer({0, 0, 0}, path, std::vector<Obstacle>{mover}, kRegions).flag);
}

TEST(DetectAll, ClearAirspace) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    const ConflictFlags f = detect_all({0, 0, 0}, {}, {}, {}, path, kRegions, kParams);
    EXPECT_FALSE(f.inner || f.middle || f.outer || f.collision);
}

TEST(DetectAll, CloseThreatRaisesInner) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    AugmentedObstacleSet set;
    set.neighbors.push_back(neighbor(1, {40, 0, std::numbers::pi}));
    const auto preds = predict_threats(set, kParams, 20);
    const std::vector<double> zeros(20, 0.0);
    const ConflictFlags f =
        detect_all({0, 0, 0}, set, preds, rollout({0, 0, 0}, zeros, kParams), path, kRegions, kParams);
    EXPECT_TRUE(f.inner);
    EXPECT_FALSE(f.collision);
}

TEST(DetectAll, StaticObstacleAheadOnlyOuter) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    AugmentedObstacleSet set;
    set.sensed.push_back(static_obstacle(5, {75, 0}, 2.0));
    const auto preds = predict_threats(set, kParams, 20);
    const std::vector<double> zeros(20, 0.0);
    const ConflictFlags f =
        detect_all({0, 0, 0}, set, preds, rollout({0, 0, 0}, zeros, kParams), path, kRegions, kParams);
    EXPECT_TRUE(f.outer);
    EXPECT_FALSE(f.inner);
    EXPECT_FALSE(f.middle);
}

TEST(DetectAll, CollisionImpliesInner) {
    const ReferencePath path = straight({0, 0}, {500, 0});
    AugmentedObstacleSet set;
    set.neighbors.push_back(neighbor(1, {20, 0, 0}));
    const ConflictFlags f = detect_all({0, 0, 0}, set, {}, {}, path, kRegions, kParams);
    EXPECT_TRUE(f.collision);
    EXPECT_TRUE(f.inner);
    ASSERT_FALSE(f.inner_threats.empty());
    EXPECT_EQ(f.inner_threats[0].id, 1);
}

}  // namespace
}  // namespace hca
