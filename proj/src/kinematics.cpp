#include "hca/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hca/errors.hpp"

namespace hca {

void VehicleParams::validate() const {
    auto check = [](double value, const char* name) {
        if (!std::isfinite(value) || value <= 0.0) {
            throw ConfigError(std::string("vehicle.") + name + " must be finite and > 0");
        }
    };
    check(speed, "speed");
    check(omega_max, "omega_max");
    check(period, "period");
}

HeadingRateCommand saturate(double omega, const VehicleParams& params) {
    if (!std::isfinite(omega)) {
        throw InvalidCommand("heading-rate command is not finite");
    }
    return {std::clamp(omega, -params.omega_max, params.omega_max)};
}

UavState step_rk2(const UavState& s, HeadingRateCommand u, const VehicleParams& params) {
    const double dt = params.period;
    const double phi_mid = s.phi + 0.5 * u.omega * dt;
    const double ds = params.speed * dt;
    return {s.x + ds * std::cos(phi_mid), s.y + ds * std::sin(phi_mid),
            wrap_angle(s.phi + u.omega * dt)};
}

std::vector<UavState> rollout(const UavState& s, std::span<const double> inputs,
                              const VehicleParams& params) {
    std::vector<UavState> out;
    out.reserve(inputs.size());
    UavState cur = s;
    for (double u : inputs) {
        cur = step_rk2(cur, HeadingRateCommand{u}, params);
        out.push_back(cur);
    }
    return out;
}

}  // namespace hca
