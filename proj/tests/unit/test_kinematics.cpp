#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hca/errors.hpp"
#include "hca/kinematics.hpp"

namespace hca {
namespace {

const VehicleParams kParams{};

// Classic RK4 on the continuous unicycle with a fine step; the reference the
// discrete model is measured against.
UavState integrate_rk4(UavState s, double omega, double duration, double dt, double speed) {
    auto f = [&](const UavState& q) { return UavState{speed * std::cos(q.phi), speed * std::sin(q.phi), omega}; };
    const int steps = static_cast<int>(std::llround(duration / dt));
    for (int i = 0; i < steps; ++i) {
        const UavState k1 = f(s);
        const UavState k2 = f({s.x + 0.5 * dt * k1.x, s.y + 0.5 * dt * k1.y, s.phi + 0.5 * dt * k1.phi});
        const UavState k3 = f({s.x + 0.5 * dt * k2.x, s.y + 0.5 * dt * k2.y, s.phi + 0.5 * dt * k2.phi});
        const UavState k4 = f({s.x + dt * k3.x, s.y + dt * k3.y, s.phi + dt * k3.phi});
        s.x += dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        s.y += dt / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
        s.phi += dt / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi);
    }
    return s;
}

double end_error(double period, double duration) {
    VehicleParams p = kParams;
    p.period = period;
    UavState s{};
    const int steps = static_cast<int>(std::llround(duration / period));
    for (int i = 0; i < steps; ++i) {
        s = step_rk2(s, {0.6}, p);
    }
    const UavState ref = integrate_rk4({}, 0.6, duration, 1e-4, p.speed);
    return std::hypot(s.x - ref.x, s.y - ref.y);
}

TEST(Saturate, ClampsAndPassesInterior) {
    EXPECT_DOUBLE_EQ(saturate(0.9, kParams).omega, 0.6);
    EXPECT_DOUBLE_EQ(saturate(0.0, kParams).omega, 0.0);
    EXPECT_DOUBLE_EQ(saturate(-0.7854, kParams).omega, -0.6);
    EXPECT_DOUBLE_EQ(saturate(0.25, kParams).omega, 0.25);
}

TEST(Saturate, Idempotent) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double w = u(rng);
        const double once = saturate(w, kParams).omega;
        EXPECT_EQ(saturate(once, kParams).omega, once);
        EXPECT_LE(std::abs(once), kParams.omega_max);
    }
}

TEST(Saturate, RejectsNonFinite) {
    EXPECT_THROW(saturate(std::numeric_limits<double>::quiet_NaN(), kParams), InvalidCommand);
    EXPECT_THROW(saturate(std::numeric_limits<double>::infinity(), kParams), InvalidCommand);
}

TEST(VehicleParams, ValidateRejectsNonPositive) {
    EXPECT_NO_THROW(kParams.validate());
    VehicleParams p;
    p.speed = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.period = -0.1;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(StepRk2, StraightFlight) {
    const UavState s = step_rk2({}, {0.0}, kParams);
    EXPECT_DOUBLE_EQ(s.x, 1.9);
    EXPECT_DOUBLE_EQ(s.y, 0.0);
    EXPECT_DOUBLE_EQ(s.phi, 0.0);
}

TEST(StepRk2, TurningStepMatchesHandValues) {
    const UavState s = step_rk2({}, {0.6}, kParams);
    EXPECT_NEAR(s.x, 1.89915, 1e-5);
    EXPECT_NEAR(s.y, 0.05699, 1e-5);
    EXPECT_NEAR(s.phi, 0.06, 1e-15);
    const UavState ref = integrate_rk4({}, 0.6, 0.1, 1e-5, kParams.speed);
    EXPECT_LT(std::hypot(s.x - ref.x, s.y - ref.y), 1e-3);
}

TEST(StepRk2, HeadingReversal) {
    const UavState s = step_rk2({0.0, 0.0, std::numbers::pi}, {0.0}, kParams);
    EXPECT_NEAR(s.x, -1.9, 1e-12);
    EXPECT_NEAR(s.y, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(s.phi, std::numbers::pi);
}

TEST(StepRk2, SecondOrderConvergence) {
    const double e1 = end_error(0.1, 2.0);
    const double e2 = end_error(0.05, 2.0);
    const double ratio = e1 / e2;
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(StepRk2, StepLengthAndHeadingWrap) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    std::uniform_real_distribution<double> phi(-std::numbers::pi, std::numbers::pi);
    UavState s{0.0, 0.0, phi(rng)};
    for (int i = 0; i < 5000; ++i) {
        const UavState next = step_rk2(s, {u(rng)}, kParams);
        EXPECT_LE(distance(s.position(), next.position()), kParams.speed * kParams.period + 1e-9);
        EXPECT_GT(next.phi, -std::numbers::pi);
        EXPECT_LE(next.phi, std::numbers::pi);
        s = next;
    }
}

TEST(Rollout, ZeroInputsAlongAxis) {
    const std::vector<double> zeros(10, 0.0);
    const auto states = rollout({}, zeros, kParams);
    ASSERT_EQ(states.size(), 10u);
    for (std::size_t k = 0; k < states.size(); ++k) {
        EXPECT_NEAR(states[k].x, 1.9 * static_cast<double>(k + 1), 1e-12);
        EXPECT_EQ(states[k].y, 0.0);
    }
}

TEST(Rollout, ConstantTurnFollowsCircle) {
    const std::vector<double> turn(20, 0.6);
    const auto states = rollout({}, turn, kParams);
    const double r = kParams.speed / kParams.omega_max;
    double worst = 0.0;
    for (const UavState& s : states) {
        worst = std::max(worst, std::abs(distance(s.position(), {0.0, r}) - r));
    }
    EXPECT_LT(worst, 0.05);
}

TEST(Rollout, EmptyAndSingle) {
    EXPECT_TRUE(rollout({}, std::vector<double>{}, kParams).empty());
    const auto one = rollout({}, std::vector<double>{0.3}, kParams);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.front(), step_rk2({}, {0.3}, kParams));
}

}  // namespace
}  // namespace hca
