#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hca/errors.hpp"
#include "hca/resolve_inner.hpp"
#include "hca/resolve_middle.hpp"
#include "hca/resolve_outer.hpp"

namespace hca {
namespace {

const VehicleParams kParams{};
const RegionConfig kRegions{};
const DmpcConfig kDmpc{};

ReferencePath straight(Vec2 a, Vec2 b) {
    std::vector<Vec2> pts;
    const int n = static_cast<int>(std::ceil(distance(a, b)));
    for (int i = 0; i <= n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
    return ReferencePath(std::move(pts), false);
}

std::vector<Vec2> straight_refs(int n) {
    std::vector<Vec2> refs;
    for (int k = 0; k < n; ++k) refs.push_back({1.9 * (k + 1), 0.0});
    return refs;
}

ThreatPrediction still(int id, Vec2 p, int n, double radius = 0.0) {
    ThreatPrediction t;
    t.id = id;
    t.position = p;
    t.radius = radius;
    t.positions.assign(static_cast<std::size_t>(n), p);
    return t;
}

ThreatPrediction moving(int id, Vec2 p, Vec2 v, int n) {
    ThreatPrediction t;
    t.id = id;
    t.position = p;
    t.velocity = v;
    for (int k = 1; k <= n; ++k) t.positions.push_back(p + v * (0.1 * k));
    return t;
}

// Independent cost evaluation: direct rollout, no shared helpers beyond step_rk2.
double oracle_cost(const UavState& s0, const std::vector<double>& u, const std::vector<Vec2>& refs,
                   const std::vector<ThreatPrediction>& preds) {
    double j = 0.0;
    UavState s = s0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        s = step_rk2(s, {u[k]}, kParams);
        const Vec2 e = s.position() - refs[k];
        j += kDmpc.w_track * dot(e, e) + kDmpc.w_effort * u[k] * u[k];
        for (const auto& t : preds) {
            if (k >= t.positions.size()) continue;
            const double d = distance(s.position(), t.positions[k]) - t.radius;
            const double h = std::max(0.0, kRegions.safe_radius + kDmpc.margin_sep - d);
            j += kDmpc.w_sep * h * h;
        }
    }
    return j;
}

TEST(DmpcConfig, Validation) {
    EXPECT_NO_THROW(kDmpc.validate(kParams));
    DmpcConfig bad = kDmpc;
    bad.segments = 3;
    EXPECT_THROW(bad.validate(kParams), ConfigError);
    bad = kDmpc;
    bad.candidate_rates = {-0.9, 0.0, 0.9};
    EXPECT_THROW(bad.validate(kParams), ConfigError);
    bad = kDmpc;
    bad.candidate_rates = {-0.3, 0.3};
    EXPECT_THROW(bad.validate(kParams), ConfigError);
}

TEST(DmpcCost, ZeroForPerfectTracking) {
    const std::vector<double> zeros(20, 0.0);
    const auto refs = straight_refs(20);
    const CostBreakdown c = cost({}, zeros, refs, {}, kDmpc, kParams, kRegions.safe_radius);
    EXPECT_NEAR(c.total, 0.0, 1e-18);
}

TEST(DmpcCost, EffortTerm) {
    const std::vector<double> u(20, 0.3);
    std::vector<Vec2> refs;
    for (const UavState& s : rollout({}, u, kParams)) refs.push_back(s.position());
    const CostBreakdown c = cost({}, u, refs, {}, kDmpc, kParams, kRegions.safe_radius);
    EXPECT_NEAR(c.tracking, 0.0, 1e-18);
    EXPECT_NEAR(c.effort, 10.0 * 20 * 0.09, 1e-9);
    EXPECT_NEAR(c.total, c.effort, 1e-9);
}

TEST(DmpcCost, SeparationHinge) {
    const std::vector<double> zeros(20, 0.0);
    const auto refs = straight_refs(20);
    // Threat riding 30 m to the side: hinge (35 - 30)^2 at each of 20 steps.
    ThreatPrediction t;
    t.id = 1;
    for (int k = 0; k < 20; ++k) t.positions.push_back({1.9 * (k + 1), 30.0});
    const CostBreakdown c =
        cost({}, zeros, refs, std::vector{t}, kDmpc, kParams, kRegions.safe_radius);
    EXPECT_NEAR(c.separation, 200.0 * 25.0 * 20, 1e-6);
    // Outside the margin: no penalty.
    for (auto& p : t.positions) p.y = 35.0;
    EXPECT_NEAR(cost({}, zeros, refs, std::vector{t}, kDmpc, kParams, kRegions.safe_radius).separation,
                0.0, 1e-12);
}

TEST(DmpcCost, ShorterThreatHorizonTruncates) {
    const std::vector<double> zeros(20, 0.0);
    const auto refs = straight_refs(20);
    const auto t = still(1, {10, 0}, 3);
    const CostBreakdown c =
        cost({}, zeros, refs, std::vector{t}, kDmpc, kParams, kRegions.safe_radius);
    EXPECT_NEAR(c.total, oracle_cost({}, zeros, refs, {t}), 1e-9);
}

TEST(DmpcSolve, CandidateCountAndSequences) {
    EXPECT_EQ(candidate_count(kDmpc), 625u);
    const auto first = candidate_sequence(0, kDmpc);
    ASSERT_EQ(first.size(), 20u);
    for (double u : first) EXPECT_EQ(u, -0.6);
    const auto last = candidate_sequence(624, kDmpc);
    for (double u : last) EXPECT_EQ(u, 0.6);
    // First block is the most significant digit.
    const auto s = candidate_sequence(125, kDmpc);
    EXPECT_EQ(s[0], -0.3);
    EXPECT_EQ(s[5], -0.6);
}

TEST(DmpcSolve, NoThreatFliesStraight) {
    const auto refs = straight_refs(20);
    const SolveResult r = solve({}, refs, {}, kDmpc, kParams, kRegions.safe_radius);
    EXPECT_EQ(r.rollouts, 625);
    for (double u : r.inputs) EXPECT_EQ(u, 0.0);
    EXPECT_NEAR(r.cost.total, 0.0, 1e-12);
}

TEST(DmpcSolve, SingleCandidateConfig) {
    DmpcConfig one = kDmpc;
    one.candidate_rates = {0.0};
    const auto refs = straight_refs(20);
    const auto t = still(1, {20, 0}, 20);
    const SolveResult r = solve({}, refs, std::vector{t}, one, kParams, kRegions.safe_radius);
    EXPECT_EQ(r.rollouts, 1);
    EXPECT_EQ(r.inputs, std::vector<double>(20, 0.0));
}

TEST(DmpcSolve, MatchesIndependentEnumeration) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-60.0, 60.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto refs = straight_refs(20);
        std::vector<ThreatPrediction> preds{
            moving(1, {40.0 + u(rng) / 2, u(rng) / 2}, {u(rng) / 4, u(rng) / 4}, 20),
            still(2, {20.0 + u(rng) / 3, u(rng) / 3}, 20, 2.0)};
        const SolveResult r = solve({}, refs, preds, kDmpc, kParams, kRegions.safe_radius);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < candidate_count(kDmpc); ++i) {
            best = std::min(best, oracle_cost({}, candidate_sequence(i, kDmpc), refs, preds));
        }
        EXPECT_NEAR(r.cost.total, best, 1e-6 * std::max(1.0, best)) << "trial " << trial;
        EXPECT_NEAR(oracle_cost({}, r.inputs, refs, preds), r.cost.total, 1e-6 * std::max(1.0, best));
    }
}

TEST(DmpcSolve, MirrorSymmetry) {
    const auto refs = straight_refs(20);
    const auto up = still(1, {25, 8}, 20);
    const auto down = still(1, {25, -8}, 20);
    const SolveResult a = solve({}, refs, std::vector{up}, kDmpc, kParams, kRegions.safe_radius);
    const SolveResult b = solve({}, refs, std::vector{down}, kDmpc, kParams, kRegions.safe_radius);
    ASSERT_EQ(a.inputs.size(), b.inputs.size());
    for (std::size_t k = 0; k < a.inputs.size(); ++k) EXPECT_EQ(a.inputs[k], -b.inputs[k]);
    EXPECT_NEAR(a.cost.total, b.cost.total, 1e-9);
    EXPECT_LT(a.inputs.front(), 0.0);
}

TEST(DmpcStep, ReferenceAndBroadcast) {
    const ReferencePath path = straight({0, 0}, {1000, 0});
    const auto refs = reference_positions({100, 0, 0}, path, kParams, 20);
    ASSERT_EQ(refs.size(), 20u);
    EXPECT_NEAR(refs[0].x, 101.9, 1e-9);
    EXPECT_NEAR(refs[19].x, 138.0, 1e-9);
    const DmpcStepResult r =
        dmpc_step({100, 0, 0}, AugmentedObstacleSet{}, path, kDmpc, kParams, kRegions, 3, 17);
    EXPECT_EQ(r.sequence.owner, 3);
    EXPECT_EQ(r.sequence.cycle, 17);
    EXPECT_EQ(r.sequence.inputs.size(), 20u);
    EXPECT_EQ(r.command.omega, r.sequence.inputs.front());
}

TEST(Reactive, LawValues) {
    const ReactiveConfig cfg{1.0, DirectionRule::right_hand};
    // rho = +1: head-on closing saturates to -0.6, quadrature is 0, receding +0.6.
    EXPECT_DOUBLE_EQ(reactive_input({38, 0}, {50, 0}, 1, cfg, kParams).omega, -0.6);
    EXPECT_NEAR(reactive_input({0, 19}, {50, 0}, 1, cfg, kParams).omega, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(reactive_input({-38, 0}, {50, 0}, 1, cfg, kParams).omega, 0.6);
    EXPECT_DOUBLE_EQ(reactive_input({38, 0}, {50, 0}, -1, cfg, kParams).omega, 0.6);
    EXPECT_EQ(reactive_input({0, 0}, {50, 0}, 1, cfg, kParams).omega, 0.0);
    EXPECT_NEAR(reactive_input_raw({38, 0}, {50, 0}, 1, cfg), -std::numbers::pi / 4, 1e-12);
}

TEST(Reactive, RawLawBounded) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    ReactiveConfig cfg;
    cfg.k_psi = 2.0;
    for (int i = 0; i < 2000; ++i) {
        const double w = reactive_input_raw({u(rng), u(rng)}, {u(rng), u(rng)}, 1, cfg);
        EXPECT_LE(std::abs(w), cfg.k_psi * std::numbers::pi / 4 + 1e-12);
    }
}

TEST(Reactive, RelativeGeometry) {
    const RelativeGeometry g = relative_geometry({0, 0, 0}, {19, 0}, {50, 0}, {-19, 0});
    EXPECT_EQ(g.relative_velocity, (Vec2{38, 0}));
    EXPECT_EQ(g.relative_position, (Vec2{50, 0}));
    EXPECT_GT(dot(g.relative_velocity, g.relative_position), 0.0);
    EXPECT_THROW(relative_geometry({0, 0, 0}, {19, 0}, {0, 0}, {0, 0}), GeometryError);
}

Threat threat_at(int id, Vec2 p, Vec2 v = {}) {
    Threat t;
    t.id = id;
    t.position = p;
    t.velocity = v;
    return t;
}

TEST(Reactive, RightHandTurnsRightOnHeadOn) {
    const ReactiveConfig cfg{1.0, DirectionRule::right_hand};
    const std::vector<Threat> ts{threat_at(1, {45, 0}, {-19, 0})};
    EXPECT_EQ(choose_direction({0, 0, 0}, ts, cfg, kParams), 1);
    EXPECT_LT(inner_resolve({0, 0, 0}, ts, cfg, kParams).omega, 0.0);
}

TEST(Reactive, FarthestSideTurnsAwayFromCrowd) {
    ReactiveConfig cfg;
    cfg.direction_rule = DirectionRule::farthest_side;
    // Two threats on the right: turn left.
    const std::vector<Threat> right{threat_at(1, {45, -5}, {-19, 0}), threat_at(2, {40, -20})};
    EXPECT_EQ(choose_direction({0, 0, 0}, right, cfg, kParams), -1);
    EXPECT_GT(inner_resolve({0, 0, 0}, right, cfg, kParams).omega, 0.0);
    // Two on the left: turn right.
    const std::vector<Threat> left{threat_at(1, {45, 5}, {-19, 0}), threat_at(2, {40, 20})};
    EXPECT_EQ(choose_direction({0, 0, 0}, left, cfg, kParams), 1);
    // Balanced: right.
    const std::vector<Threat> even{threat_at(1, {45, 5}), threat_at(2, {40, -20})};
    EXPECT_EQ(choose_direction({0, 0, 0}, even, cfg, kParams), 1);
    EXPECT_THROW(choose_direction({0, 0, 0}, std::vector<Threat>{}, cfg, kParams), GeometryError);
}

TEST(Reactive, Validation) {
    ReactiveConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.k_psi = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_EQ(to_string(DirectionRule::farthest_side), "farthest-side");
}

Obstacle blocker_at(Vec2 p, double radius) {
    Obstacle o;
    o.id = 100;
    o.position = p;
    o.radius = radius;
    return o;
}

TEST(OuterSubtargets, OffsetClearsBlocker) {
    const ReferencePath path = straight({0, 0}, {1000, 0});
    const Obstacle b = blocker_at({300, 0}, 5.0);
    const OuterMargins m{};
    const Subtargets st = generate_subtargets(path, {220, 0, 0}, b, kRegions, m);
    ASSERT_FALSE(st.empty());
    EXPECT_NEAR(st.offset, kRegions.safe_radius + 5.0 + m.clearance_margin, 1e-6);
    EXPECT_EQ(st.side, 1);
    EXPECT_GE(st.subtarget_count, 1u);
    for (const Vec2& p : st.subtargets()) {
        EXPECT_GE(distance(p, b.position) - b.radius, kRegions.safe_radius - 1e-9);
    }
    EXPECT_LT(st.window_begin, 300.0);
    EXPECT_GT(st.window_end, 300.0);
    EXPECT_GT(st.rejoin_arclength, st.window_end);
}

TEST(OuterSubtargets, FarObstacleGivesNothing) {
    const ReferencePath path = straight({0, 0}, {1000, 0});
    EXPECT_TRUE(generate_subtargets(path, {220, 0, 0}, blocker_at({300, 50}, 5.0), kRegions, {}).empty());
}

TEST(OuterSubtargets, DeviatesAwayFromOffCenterBlocker) {
    const ReferencePath path = straight({0, 0}, {1000, 0});
    const Subtargets st = generate_subtargets(path, {220, 0, 0}, blocker_at({300, 1}, 5.0), kRegions, {});
    ASSERT_FALSE(st.empty());
    EXPECT_EQ(st.side, -1);
    for (const Vec2& p : st.subtargets()) EXPECT_LT(p.y, 0.0);
}

TEST(OuterSubtargets, TooCloseThrows) {
    const ReferencePath path = straight({0, 0}, {1000, 0});
    EXPECT_THROW(generate_subtargets(path, {290, 0, 0}, blocker_at({300, 0}, 5.0), kRegions, {}),
                 PlanError);
}

TEST(OuterPlan, DetourIsFlyableAndClear) {
    const ReferencePath path = straight({0, 0}, {1000, 0});
    const Obstacle b = blocker_at({300, 0}, 5.0);
    const UavState s{215, 0, 0};  // first outer-layer contact
    const auto plan = plan_detour(path, s, b, kRegions, {}, kParams, {});
    ASSERT_TRUE(plan.has_value());
    EXPECT_TRUE(plan->active);
    EXPECT_EQ(plan->blocker_id, 100);
    EXPECT_GT(plan_clearance(*plan, b), kRegions.safe_radius);
    EXPECT_LE(max_curvature(plan->detour), kParams.omega_max / kParams.speed + 1e-9);
    EXPECT_LT(distance(plan->detour.samples().front(), s.position()), 1.0);
    EXPECT_LT(path.closest_point(plan->detour.samples().back()).distance, 1.0);
    EXPECT_GT(plan->rejoin_arclength, 300.0);
}

TEST(OuterPlan, FlyingTheDetourKeepsClear) {
    const ReferencePath path = straight({0, 0}, {1000, 0});
    const Obstacle b = blocker_at({300, 0}, 5.0);
    const UavState s{215, 0, 0};  // first outer-layer contact
    const auto plan = plan_detour(path, s, b, kRegions, {}, kParams, {});
    ASSERT_TRUE(plan.has_value());
    EXPECT_LT(flown_clearance(*plan, s, b, {}, kParams), plan_clearance(*plan, b));
    const auto states = tracking_rollout(s, plan->detour, {}, kParams, 100, 0.0);
    double worst = std::numeric_limits<double>::infinity();
    for (const UavState& q : states) worst = std::min(worst, distance(q.position(), b.position) - b.radius);
    EXPECT_GT(worst, kRegions.safe_radius);
}

TEST(OuterPlan, MaxCurvatureOfCircle) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 200; ++i) {
        const double a = 0.01 * i;
        pts.push_back({50.0 * std::cos(a), 50.0 * std::sin(a)});
    }
    EXPECT_NEAR(max_curvature(ReferencePath(pts, false)), 1.0 / 50.0, 1e-4);
}

}  // namespace
}  // namespace hca
