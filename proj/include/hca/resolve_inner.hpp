#pragma once

#include <span>
#include <string_view>

#include "hca/detection.hpp"
#include "hca/kinematics.hpp"

namespace hca {

enum class DirectionRule { right_hand, farthest_side };

std::string_view to_string(DirectionRule r);

struct ReactiveConfig {
    double k_psi{3.0};  // 1/s
    DirectionRule direction_rule{DirectionRule::farthest_side};

    void validate() const;
};

/// v_ij = v_i - v_j and P_ij = p_j - p_i. The pair is closing iff dot(v_ij, P_ij) > 0.
struct RelativeGeometry {
    Vec2 relative_velocity;
    Vec2 relative_position;
};

/// Throws GeometryError when the positions coincide.
RelativeGeometry relative_geometry(const UavState& own, const Vec2& own_velocity,
                                   const Vec2& other_position, const Vec2& other_velocity);

/// rho * k_psi * (acos(cos angle(v_ij, P_ij)) / 2 - pi/4), before saturation.
double reactive_input_raw(const Vec2& v_ij, const Vec2& p_ij, int rho, const ReactiveConfig& cfg);

/// Saturated reactive law. Zero relative velocity yields 0.
HeadingRateCommand reactive_input(const Vec2& v_ij, const Vec2& p_ij, int rho,
                                  const ReactiveConfig& cfg, const VehicleParams& params);

/// Turning-direction sign for the primary (first) threat.
///
/// right_hand: turn to the own right of the line of sight.
/// farthest_side: turn toward the half-plane of the own velocity holding fewer
/// threats; ties turn right.
/// Throws GeometryError on an empty list.
int choose_direction(const UavState& s, std::span<const Threat> threats,
                     const ReactiveConfig& cfg, const VehicleParams& params);

/// Reactive command against the primary threat with rho from choose_direction.
HeadingRateCommand inner_resolve(const UavState& s, std::span<const Threat> threats,
                                 const ReactiveConfig& cfg, const VehicleParams& params);

}  // namespace hca
