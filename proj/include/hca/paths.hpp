#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hca/geometry.hpp"
#include "hca/kinematics.hpp"

namespace hca {

/// Result of a closest-point query against a ReferencePath.
struct PathQuery {
    Vec2 nearest_point;
    double arclength{0.0};
    double distance{0.0};
};

/// Dense polyline with a cumulative-arclength index.
///
/// Closed paths join the last sample back to the first implicitly; a trailing
/// sample equal to the first one is dropped on construction. Consecutive
/// duplicate samples are removed. Immutable after construction, so one instance
/// can be shared read-only by every agent.
class ReferencePath {
public:
    ReferencePath() = default;
    ReferencePath(std::vector<Vec2> samples, bool closed);

    const std::vector<Vec2>& samples() const { return samples_; }
    /// arclength of each sample; strictly increasing, starting at 0.
    const std::vector<double>& arclengths() const { return arclengths_; }
    bool closed() const { return closed_; }
    double length() const { return length_; }
    bool empty() const { return samples_.empty(); }

    std::size_t segment_count() const;
    Vec2 segment_start(std::size_t i) const { return samples_[i]; }
    Vec2 segment_end(std::size_t i) const;

    /// Maps any arclength into [0, length) on closed paths, [0, length] on open ones.
    double normalize_arclength(double s) const;
    Vec2 point_at(double s) const;
    /// Unit tangent of the segment containing s.
    Vec2 tangent_at(double s) const;

    /// Global nearest point. Ties within 1e-9 m are broken by the smaller arclength.
    PathQuery closest_point(const Vec2& p) const;

    /// Minimum distance from p to the path section [s_begin, s_begin + span_length]
    /// (wrapping on closed paths, clamped on open ones).
    PathQuery closest_point_in_window(const Vec2& p, double s_begin, double span_length) const;

private:
    void build_index();
    void consider_segment(std::size_t seg, const Vec2& p, PathQuery& best, bool& found) const;

    std::vector<Vec2> samples_;
    std::vector<double> arclengths_;
    bool closed_{false};
    double length_{0.0};

    // Uniform bucket grid over segment bounding boxes.
    double cell_size_{10.0};
    double grid_min_x_{0.0};
    double grid_min_y_{0.0};
    int grid_nx_{0};
    int grid_ny_{0};
    std::vector<std::vector<std::uint32_t>> cells_;
};

struct TrackerConfig {
    double lookahead{40.0};  // m
    double k_track{1.0};     // 1/s

    void validate() const;
};

/// Closed rounded equilateral triangle. Corners are circular fillets tangent to
/// both edges; corner_radius = 0 gives the sharp triangle. The first vertex sits
/// at angle rotation + pi/2 from the center; the path runs counter-clockwise.
ReferencePath build_triangle_like_path(Vec2 center, double circumradius, double corner_radius,
                                       double samples_per_meter, double rotation = 0.0);

/// Analytic perimeter of build_triangle_like_path's curve.
double triangle_like_length(double circumradius, double corner_radius);

/// Circumradius whose rounded triangle has the requested perimeter.
double triangle_circumradius_for_length(double length, double corner_radius);

/// Clamped uniform cubic B-spline. Interpolates the first and last control points,
/// C2 inside. Throws GeometryError for fewer than 4 control points.
ReferencePath cubic_bspline(std::span<const Vec2> control_points, int samples_per_span);

/// Evaluates the clamped uniform cubic B-spline at parameter t in [0, n_ctrl - 3].
Vec2 cubic_bspline_point(std::span<const Vec2> control_points, double t);

inline PathQuery closest_point(const ReferencePath& path, const Vec2& p) {
    return path.closest_point(p);
}

/// Projection of p onto the path. Without `progress` this is the global nearest
/// point. With it, only [progress - 5 m, progress + 30 m] is searched, so a UAV
/// pushed off the path near a corner keeps its place instead of snapping back to
/// the incoming leg when that happens to be closer.
PathQuery project(const ReferencePath& path, const Vec2& p, std::optional<double> progress);

/// Pure pursuit toward a virtual target lookahead meters past the projection.
HeadingRateCommand pure_pursuit_los(const UavState& s, const ReferencePath& path,
                                    const TrackerConfig& cfg, const VehicleParams& params,
                                    std::optional<double> progress = std::nullopt);

/// Closed-loop pure-pursuit prediction over `steps` control periods. The
/// projection is carried forward from `progress` step by step when given.
std::vector<UavState> tracking_rollout(const UavState& s, const ReferencePath& path,
                                       const TrackerConfig& cfg, const VehicleParams& params,
                                       int steps, std::optional<double> progress = std::nullopt);

/// "x y" per line, meters. Blank lines and lines starting with '#' are skipped on read.
void write_path_text(std::ostream& out, const ReferencePath& path);
ReferencePath read_path_text(std::istream& in, bool closed);

}  // namespace hca
