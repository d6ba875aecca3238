#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hca/geometry.hpp"

namespace hca {

/// Planar pose of one vehicle. Heading is kept in (-pi, pi].
struct UavState {
    double x{0.0};
    double y{0.0};
    double phi{0.0};

    Vec2 position() const { return {x, y}; }
    bool operator==(const UavState&) const = default;
};

/// Constant cruising speed, heading-rate bound and control period.
struct VehicleParams {
    double speed{19.0};      // m/s
    double omega_max{0.6};   // rad/s
    double period{0.1};      // s

    /// Throws ConfigError unless every field is finite and strictly positive.
    void validate() const;
};

struct HeadingRateCommand {
    double omega{0.0};  // rad/s
};

/// A vehicle's horizon of heading-rate commands, as broadcast to neighbors.
struct PlannedSequence {
    int owner{-1};
    std::int64_t cycle{0};
    std::vector<double> inputs;

    bool operator==(const PlannedSequence&) const = default;
};

/// Velocity vector of a vehicle flying at the cruising speed.
inline Vec2 velocity_of(const UavState& s, const VehicleParams& params) {
    return heading_vector(s.phi) * params.speed;
}

/// Clamps omega to [-omega_max, omega_max]. Throws InvalidCommand on non-finite input.
HeadingRateCommand saturate(double omega, const VehicleParams& params);

/// One midpoint Runge-Kutta step of the unicycle model. The heading is advanced
/// half a period before the position update, so every step covers exactly speed*period.
UavState step_rk2(const UavState& s, HeadingRateCommand u, const VehicleParams& params);

/// Applies the inputs in order; element k is the state after the first k+1 inputs.
std::vector<UavState> rollout(const UavState& s, std::span<const double> inputs,
                              const VehicleParams& params);

inline std::vector<UavState> rollout(const UavState& s, const PlannedSequence& seq,
                                     const VehicleParams& params) {
    return rollout(s, seq.inputs, params);
}

}  // namespace hca
