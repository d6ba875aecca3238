#pragma once

#include <stdexcept>
#include <string>

namespace hca {

/// Invalid scenario or component configuration. The message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite or otherwise unusable control input.
class InvalidCommand : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Geometric precondition violated (coincident positions, empty threat lists, ...).
class GeometryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Outer-layer replanning could not produce a valid detour.
class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hca
