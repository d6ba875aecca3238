#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hca/geometry.hpp"
#include "hca/kinematics.hpp"

namespace hca {

/// Broadcast payload of one agent for one cycle.
///
/// `state` is the sender's pose after the cycle's control step, i.e. its pose at
/// the start of cycle + 1. A present `sequence` is the full horizon solved at
/// `cycle`; its first input has already been applied when the message is read.
/// `lookahead` holds predicted positions for the next control steps under
/// nominal tracking.
struct StateMessage {
    int sender{-1};
    std::int64_t cycle{0};
    UavState state;
    Vec2 velocity;
    std::optional<PlannedSequence> sequence;
    std::optional<std::vector<Vec2>> lookahead;

    bool operator==(const StateMessage&) const = default;
};

}  // namespace hca
