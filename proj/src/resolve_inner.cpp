#include "hca/resolve_inner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "hca/errors.hpp"

namespace hca {

std::string_view to_string(DirectionRule r) {
    switch (r) {
        case DirectionRule::right_hand: return "right-hand";
        case DirectionRule::farthest_side: return "farthest-side";
    }
    return "right-hand";
}

void ReactiveConfig::validate() const {
    if (!(k_psi > 0.0) || !std::isfinite(k_psi)) {
        throw ConfigError("reactive.k_psi must be finite and > 0");
    }
}

RelativeGeometry relative_geometry(const UavState& own, const Vec2& own_velocity,
                                   const Vec2& other_position, const Vec2& other_velocity) {
    const Vec2 p_ij = other_position - own.position();
    if (p_ij.squared_norm() == 0.0) {
        throw GeometryError("relative_geometry: coincident positions");
    }
    return {own_velocity - other_velocity, p_ij};
}

double reactive_input_raw(const Vec2& v_ij, const Vec2& p_ij, int rho, const ReactiveConfig& cfg) {
    const double denom = v_ij.norm() * p_ij.norm();
    if (denom == 0.0) {
        return 0.0;
    }
    const double c = std::clamp(dot(v_ij, p_ij) / denom, -1.0, 1.0);
    return rho * cfg.k_psi * (0.5 * std::acos(c) - std::numbers::pi / 4);
}

HeadingRateCommand reactive_input(const Vec2& v_ij, const Vec2& p_ij, int rho,
                                  const ReactiveConfig& cfg, const VehicleParams& params) {
    if (v_ij.squared_norm() == 0.0) {
        spdlog::debug("reactive_input: zero relative velocity, no reactive command");
        return {0.0};
    }
    return saturate(reactive_input_raw(v_ij, p_ij, rho, cfg), params);
}

int choose_direction(const UavState& s, std::span<const Threat> threats,
                     const ReactiveConfig& cfg, const VehicleParams& params) {
    if (threats.empty()) {
        throw GeometryError("choose_direction: empty threat list");
    }
    const Vec2 own_v = velocity_of(s, params);
    // -1 turns right (clockwise), +1 turns left.
    int turn = -1;
    if (cfg.direction_rule == DirectionRule::farthest_side) {
        int left = 0;
        int right = 0;
        for (const Threat& t : threats) {
            const double side = cross(own_v, t.position - s.position());
            if (side > 0.0) {
                ++left;
            } else if (side < 0.0) {
                ++right;
            }
        }
        turn = left < right ? +1 : -1;
    }
    // The bracket is negative while closing, so rho = -turn gives the wanted turn on
    // approach and turns back toward quadrature once the threat recedes.
    return -turn;
}

HeadingRateCommand inner_resolve(const UavState& s, std::span<const Threat> threats,
                                 const ReactiveConfig& cfg, const VehicleParams& params) {
    const int rho = choose_direction(s, threats, cfg, params);
    const Threat& primary = threats.front();
    const Vec2 own_v = velocity_of(s, params);
    if (distance(primary.position, s.position()) == 0.0) {
        return {0.0};
    }
    const RelativeGeometry g = relative_geometry(s, own_v, primary.position, primary.velocity);
    return reactive_input(g.relative_velocity, g.relative_position, rho, cfg, params);
}

}  // namespace hca
