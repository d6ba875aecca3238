#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hca/detection.hpp"
#include "hca/kinematics.hpp"
#include "hca/paths.hpp"
#include "hca/world.hpp"

namespace hca {

/// Geometry knobs of the sub-target construction.
struct OuterMargins {
    double clearance_margin{10.0};  // extra clearance beyond R_s + radius, m
    double entry_length{15.0};      // max distance from the UAV projection to the entry anchor, m
    double exit_length{80.0};       // rejoin distance past the blocked window, m
    double scan_length{400.0};      // how far ahead the blocked window is searched, m
    double offset_gain{1.0};        // scales the lateral sub-target offset
    double spread{0.0};             // > 0: outer sub-targets at closest pass -/+ spread instead of the window ends
    bool radial{false};             // push window points away from the blocker center instead of along the path normal
};

/// Control points for the detour: entry anchor, 1-3 sub-targets, exit approach
/// and exit anchor, in flight order. Empty when the path is not blocked.
struct Subtargets {
    std::vector<Vec2> points;
    std::size_t first_subtarget{0};
    std::size_t subtarget_count{0};
    double window_begin{0.0};   // blocked arclength window on the reference
    double window_end{0.0};
    double rejoin_arclength{0.0};
    int side{0};                // +1 left of the path, -1 right
    double offset{0.0};         // lateral sub-target offset, m

    bool empty() const { return points.empty(); }
    std::span<const Vec2> subtargets() const {
        return std::span(points).subspan(first_subtarget, subtarget_count);
    }
};

/// Sub-targets around `blocker`. The blocked window is where the reference passes
/// within R_s + radius + clearance_margin of the blocker center. Sub-targets sit at
/// the window start, the closest pass and the window end, shifted to the side of
/// the path away from the blocker by (R_s + radius + margin - closest clearance).
/// A blocker centered on the path deviates toward the side with more free space
/// to `others`, else left. With `radial` set, sub-targets are the window points
/// pushed out from the blocker center to the same clearance, which stays smooth
/// where the offset would exceed the path's own turn radius (blocker outside a
/// corner). Throws PlanError when the UAV is within R_s of the blocker.
Subtargets generate_subtargets(const ReferencePath& path, const UavState& s,
                               const Obstacle& blocker, const RegionConfig& cfg,
                               const OuterMargins& margins,
                               std::span<const Obstacle> others = {},
                               std::optional<double> progress = std::nullopt);

struct LocalPlan {
    ReferencePath detour;  // open
    double rejoin_arclength{0.0};
    int blocker_id{-1};
    bool active{false};
};

/// Clamped cubic B-spline through [current position, control points...],
/// sampled every ~0.1 m. Throws PlanError when the detour passes within
/// R_s + radius of the blocker or its discrete curvature exceeds omega_max / speed.
LocalPlan replan(const UavState& s, const Subtargets& subtargets, const ReferencePath& path,
                 const Obstacle& blocker, const RegionConfig& cfg, const VehicleParams& params);

/// Minimum separation between the blocker and the detour from arclength `from` on.
double plan_clearance(const LocalPlan& plan, const Obstacle& o, double from = 0.0);

/// Minimum separation to `o` along the track the tracker actually flies on the
/// detour from `s`, up to the point where the engine hands back to the reference.
/// Pure pursuit cuts inside the spline, so this is below plan_clearance.
double flown_clearance(const LocalPlan& plan, const UavState& s, const Obstacle& o,
                       const TrackerConfig& tracker, const VehicleParams& params);

/// Largest discrete curvature (1/m) over consecutive sample triples.
double max_curvature(const ReferencePath& path);

/// Searches sub-target layouts (clearance margin, offset gain, spread, entry and
/// exit lengths) in order of preference and returns the first detour that
/// validates, is flown by the tracker clear of R_s around the blocker,
/// and keeps R_s clear of `others` too. Returns nullopt (and logs)
/// when none does, leaving the conflict to the middle layer.
std::optional<LocalPlan> plan_detour(const ReferencePath& path, const UavState& s,
                                     const Obstacle& blocker, const RegionConfig& cfg,
                                     const OuterMargins& margins, const VehicleParams& params,
                                     const TrackerConfig& tracker,
                                     std::span<const Obstacle> others = {},
                                     std::optional<double> progress = std::nullopt);

}  // namespace hca
