#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hca/kinematics.hpp"
#include "hca/paths.hpp"
#include "hca/world.hpp"

namespace hca {

/// Nested detection radii around a UAV plus detection horizons and margins.
struct RegionConfig {
    double safe_radius{30.0};    // R_s
    double inner_radius{55.0};   // R_i
    double middle_radius{70.0};  // R_m
    double outer_radius{80.0};   // R_o
    double warning_time{3.0};    // tau_w, s
    double middle_margin{5.0};   // added to R_s by prediction-based detection, m
    double tracking_margin{10.0};  // path-tracking error allowance of the outer layer, m
    double slow_speed{1.0};      // objects faster than this are not path-blocking, m/s

    /// Requires 0 < R_s < R_i < R_m < R_o and positive horizons/margins.
    void validate() const;
};

enum class Region { collision, inner, middle, outer, clear };

std::string_view to_string(Region r);

/// Layer of a separation d per the half-open intervals (R_s, R_i], (R_i, R_m],
/// (R_m, R_o]; d <= R_s is a collision. Throws GeometryError for negative d.
Region classify_region(double d, const RegionConfig& cfg);

enum class ThreatKind { neighbor, obstacle };

/// One object of the augmented set with its kinematics and predicted encounter.
struct Threat {
    int id{-1};
    ThreatKind kind{ThreatKind::obstacle};
    Vec2 position;
    Vec2 velocity;
    double radius{0.0};
    double separation{0.0};      // current, center distance minus radius
    double min_separation{0.0};  // predicted minimum over the detector's horizon
    double time_to_min{0.0};     // s
};

/// Predicted future positions of one augmented-set member at steps 1..M.
struct ThreatPrediction {
    int id{-1};
    ThreatKind kind{ThreatKind::obstacle};
    Vec2 position;   // current
    Vec2 velocity;
    double radius{0.0};
    std::vector<Vec2> positions;
};

/// Builds horizon-length predictions for every member of the set: neighbors from
/// their broadcast sequence (first input already applied), else from their
/// broadcast reference lookahead, else at constant velocity; sensed objects at
/// constant velocity.
std::vector<ThreatPrediction> predict_threats(const AugmentedObstacleSet& set,
                                              const VehicleParams& params, int horizon);

struct InnerDetection {
    bool flag{false};
    std::vector<Threat> threats;  // sorted by time_to_min, then id
};

/// Constant-velocity closest-approach test against threats in (R_s, R_i] that are closing.
InnerDetection detect_inner(const UavState& s, const AugmentedObstacleSet& set,
                            const RegionConfig& cfg, const VehicleParams& params);

struct MiddleDetection {
    bool flag{false};
    std::vector<Threat> threats;  // sorted by time_to_min, then id
};

/// Step-synchronized comparison of the own predicted trajectory with every
/// prediction; fires when a threat within R_m comes within R_s + middle_margin.
/// Uses the shorter horizon when lengths differ.
MiddleDetection detect_middle(const UavState& s, std::span<const UavState> own_planned,
                              std::span<const ThreatPrediction> predictions,
                              const RegionConfig& cfg, const VehicleParams& params);

struct OuterDetection {
    bool flag{false};
    std::optional<Obstacle> blocker;
    double blocker_path_clearance{0.0};  // distance from the blocker center to the window
};

/// Slow sensed objects in (R_m, R_o] lying within R_s + radius + tracking_margin
/// of the reference section [s_now, s_now + R_o] ahead of the UAV's projection.
/// The blocker is the flagged object closest to the UAV along the path.
OuterDetection detect_outer(const UavState& s, const ReferencePath& path,
                            std::span<const Obstacle> sensed, const RegionConfig& cfg,
                            std::optional<double> progress = std::nullopt);

struct ConflictFlags {
    bool inner{false};
    bool middle{false};
    bool outer{false};
    bool collision{false};
    std::vector<Threat> inner_threats;
    std::vector<Threat> middle_threats;
    std::optional<Obstacle> outer_blocker;
};

/// Runs the three detectors. Collision is set when any current separation is
/// <= R_s; a collision also raises the inner flag and lists the object as an
/// inner threat.
ConflictFlags detect_all(const UavState& s, const AugmentedObstacleSet& set,
                         std::span<const ThreatPrediction> predictions,
                         std::span<const UavState> own_planned, const ReferencePath& path,
                         const RegionConfig& cfg, const VehicleParams& params,
                         std::optional<double> progress = std::nullopt);

}  // namespace hca
