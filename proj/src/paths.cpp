#include "hca/paths.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "hca/errors.hpp"

namespace hca {
namespace {

constexpr double kTieTolerance = 1e-9;
constexpr double kGridPadding = 200.0;
constexpr double kProgressBack = 5.0;    // m
constexpr double kProgressAhead = 30.0;  // m

// Better by distance, then by smaller arclength on near-equal distances.
bool better_candidate(double d, double s, const PathQuery& best) {
    if (d < best.distance - kTieTolerance) {
        return true;
    }
    return d <= best.distance + kTieTolerance && s < best.arclength;
}

}  // namespace

ReferencePath::ReferencePath(std::vector<Vec2> samples, bool closed) : closed_(closed) {
    samples_.reserve(samples.size());
    for (const Vec2& p : samples) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw GeometryError("path sample is not finite");
        }
        if (samples_.empty() || distance(samples_.back(), p) > 1e-12) {
            samples_.push_back(p);
        }
    }
    if (closed_ && samples_.size() > 1 && distance(samples_.front(), samples_.back()) <= 1e-12) {
        samples_.pop_back();
    }
    if (samples_.size() < 3) {
        throw GeometryError("reference path needs at least 3 distinct samples");
    }
    arclengths_.resize(samples_.size());
    arclengths_[0] = 0.0;
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        arclengths_[i] = arclengths_[i - 1] + distance(samples_[i - 1], samples_[i]);
    }
    length_ = arclengths_.back();
    if (closed_) {
        length_ += distance(samples_.back(), samples_.front());
    }
    build_index();
}

std::size_t ReferencePath::segment_count() const {
    return closed_ ? samples_.size() : samples_.size() - 1;
}

Vec2 ReferencePath::segment_end(std::size_t i) const {
    return samples_[(i + 1) % samples_.size()];
}

double ReferencePath::normalize_arclength(double s) const {
    if (closed_) {
        double r = std::fmod(s, length_);
        if (r < 0.0) {
            r += length_;
        }
        return r >= length_ ? 0.0 : r;
    }
    return std::clamp(s, 0.0, length_);
}

namespace {

// Index of the segment whose arclength interval contains s (already normalized).
std::size_t segment_containing(const std::vector<double>& arclengths, std::size_t segments,
                               double s) {
    auto it = std::upper_bound(arclengths.begin(), arclengths.end(), s);
    std::size_t idx = it == arclengths.begin() ? 0 : static_cast<std::size_t>(it - arclengths.begin()) - 1;
    return std::min(idx, segments - 1);
}

}  // namespace

Vec2 ReferencePath::point_at(double s) const {
    s = normalize_arclength(s);
    const std::size_t seg = segment_containing(arclengths_, segment_count(), s);
    const Vec2 a = segment_start(seg);
    const Vec2 b = segment_end(seg);
    const double len = distance(a, b);
    const double t = std::clamp((s - arclengths_[seg]) / len, 0.0, 1.0);
    return a + (b - a) * t;
}

Vec2 ReferencePath::tangent_at(double s) const {
    s = normalize_arclength(s);
    const std::size_t seg = segment_containing(arclengths_, segment_count(), s);
    const Vec2 d = segment_end(seg) - segment_start(seg);
    return d / d.norm();
}

void ReferencePath::build_index() {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (const Vec2& p : samples_) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    grid_min_x_ = min_x - kGridPadding;
    grid_min_y_ = min_y - kGridPadding;
    grid_nx_ = static_cast<int>(std::ceil((max_x - min_x + 2 * kGridPadding) / cell_size_)) + 1;
    grid_ny_ = static_cast<int>(std::ceil((max_y - min_y + 2 * kGridPadding) / cell_size_)) + 1;
    cells_.assign(static_cast<std::size_t>(grid_nx_) * static_cast<std::size_t>(grid_ny_), {});
    for (std::size_t seg = 0; seg < segment_count(); ++seg) {
        const Vec2 a = segment_start(seg);
        const Vec2 b = segment_end(seg);
        const int ix0 = static_cast<int>(std::floor((std::min(a.x, b.x) - grid_min_x_) / cell_size_));
        const int ix1 = static_cast<int>(std::floor((std::max(a.x, b.x) - grid_min_x_) / cell_size_));
        const int iy0 = static_cast<int>(std::floor((std::min(a.y, b.y) - grid_min_y_) / cell_size_));
        const int iy1 = static_cast<int>(std::floor((std::max(a.y, b.y) - grid_min_y_) / cell_size_));
        for (int ix = ix0; ix <= ix1; ++ix) {
            for (int iy = iy0; iy <= iy1; ++iy) {
                cells_[static_cast<std::size_t>(iy) * grid_nx_ + ix].push_back(
                    static_cast<std::uint32_t>(seg));
            }
        }
    }
}

void ReferencePath::consider_segment(std::size_t seg, const Vec2& p, PathQuery& best,
                                     bool& found) const {
    const Vec2 a = segment_start(seg);
    const Vec2 ab = segment_end(seg) - a;
    const double len2 = ab.squared_norm();
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    const Vec2 q = a + ab * t;
    const double d = distance(p, q);
    double s = arclengths_[seg] + t * std::sqrt(len2);
    if (closed_ && s >= length_) {
        s -= length_;
    }
    if (!found || better_candidate(d, s, best)) {
        best = {q, s, d};
        found = true;
    }
}

PathQuery ReferencePath::closest_point(const Vec2& p) const {
    PathQuery best;
    bool found = false;
    const double fx = (p.x - grid_min_x_) / cell_size_;
    const double fy = (p.y - grid_min_y_) / cell_size_;
    if (fx < 0 || fy < 0 || fx >= grid_nx_ || fy >= grid_ny_) {
        for (std::size_t seg = 0; seg < segment_count(); ++seg) {
            consider_segment(seg, p, best, found);
        }
        return best;
    }
    const int cx = static_cast<int>(fx);
    const int cy = static_cast<int>(fy);
    const int max_ring = std::max(grid_nx_, grid_ny_);
    for (int r = 0; r <= max_ring; ++r) {
        if (found && best.distance + kTieTolerance < (r - 1) * cell_size_) {
            break;
        }
        for (int ix = cx - r; ix <= cx + r; ++ix) {
            if (ix < 0 || ix >= grid_nx_) {
                continue;
            }
            const bool edge_column = ix == cx - r || ix == cx + r;
            for (int iy = cy - r; iy <= cy + r; iy += edge_column ? 1 : 2 * std::max(r, 1)) {
                if (iy < 0 || iy >= grid_ny_) {
                    continue;
                }
                for (std::uint32_t seg : cells_[static_cast<std::size_t>(iy) * grid_nx_ + ix]) {
                    consider_segment(seg, p, best, found);
                }
            }
        }
    }
    return best;
}

PathQuery ReferencePath::closest_point_in_window(const Vec2& p, double s_begin,
                                                 double span_length) const {
    PathQuery best{point_at(s_begin), normalize_arclength(s_begin),
                   distance(p, point_at(s_begin))};
    if (span_length <= 0.0) {
        return best;
    }
    double s = normalize_arclength(s_begin);
    double remaining = closed_ ? std::min(span_length, length_) : std::min(span_length, length_ - s);
    std::size_t seg = segment_containing(arclengths_, segment_count(), s);
    while (remaining > 0.0) {
        const Vec2 a = segment_start(seg);
        const Vec2 ab = segment_end(seg) - a;
        const double len = ab.norm();
        const double local_begin = std::clamp(s - arclengths_[seg], 0.0, len);
        const double local_end = std::min(len, local_begin + remaining);
        const double t_proj = dot(p - a, ab) / len;
        const double t = std::clamp(t_proj, local_begin, local_end);
        const Vec2 q = a + ab * (t / len);
        const double d = distance(p, q);
        const double sq = normalize_arclength(arclengths_[seg] + t);
        if (d < best.distance - kTieTolerance) {
            best = {q, sq, d};
        }
        const double consumed = local_end - local_begin;
        remaining -= consumed;
        if (remaining <= 1e-12) {
            break;
        }
        ++seg;
        if (seg >= segment_count()) {
            if (!closed_) {
                break;
            }
            seg = 0;
        }
        s = arclengths_[seg];
    }
    return best;
}

void TrackerConfig::validate() const {
    if (!(lookahead > 0.0) || !std::isfinite(lookahead)) {
        throw ConfigError("tracker.lookahead must be finite and > 0");
    }
    if (!(k_track > 0.0) || !std::isfinite(k_track)) {
        throw ConfigError("tracker.k_track must be finite and > 0");
    }
}

double triangle_like_length(double circumradius, double corner_radius) {
    const double side = std::numbers::sqrt3 * circumradius;
    const double tangent_offset = std::numbers::sqrt3 * corner_radius;
    return 3.0 * (side - 2.0 * tangent_offset) + 2.0 * std::numbers::pi * corner_radius;
}

double triangle_circumradius_for_length(double length, double corner_radius) {
    return (length - 2.0 * std::numbers::pi * corner_radius) / (3.0 * std::numbers::sqrt3) +
           2.0 * corner_radius;
}

ReferencePath build_triangle_like_path(Vec2 center, double circumradius, double corner_radius,
                                       double samples_per_meter, double rotation) {
    if (!(circumradius > 0.0) || !(corner_radius >= 0.0) || !(samples_per_meter > 0.0)) {
        throw ConfigError("triangle path: circumradius, corner_radius and sampling must be positive");
    }
    if (corner_radius >= circumradius || 2.0 * corner_radius > circumradius) {
        throw ConfigError("triangle path: corner_radius too large, corner arcs would overlap");
    }
    std::array<Vec2, 3> v{};
    for (int k = 0; k < 3; ++k) {
        const double a = rotation + std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / 3.0;
        v[k] = center + Vec2{std::cos(a), std::sin(a)} * circumradius;
    }
    const double t = std::numbers::sqrt3 * corner_radius;
    std::array<Vec2, 3> tin{};
    std::array<Vec2, 3> tout{};
    std::array<Vec2, 3> arc_center{};
    for (int k = 0; k < 3; ++k) {
        const Vec2 prev = v[(k + 2) % 3];
        const Vec2 next = v[(k + 1) % 3];
        const Vec2 d_in = (v[k] - prev) / distance(v[k], prev);
        const Vec2 d_out = (next - v[k]) / distance(next, v[k]);
        tin[k] = v[k] - d_in * t;
        tout[k] = v[k] + d_out * t;
        const Vec2 to_center = (center - v[k]) / distance(center, v[k]);
        arc_center[k] = v[k] + to_center * (2.0 * corner_radius);
    }

    std::vector<Vec2> pts;
    auto add_line = [&](Vec2 a, Vec2 b) {
        const double len = distance(a, b);
        const int n = std::max(1, static_cast<int>(std::ceil(len * samples_per_meter)));
        for (int j = 0; j < n; ++j) {
            pts.push_back(a + (b - a) * (static_cast<double>(j) / n));
        }
    };
    auto add_arc = [&](int k) {
        if (corner_radius <= 0.0) {
            return;
        }
        const double sweep = 2.0 * std::numbers::pi / 3.0;
        const Vec2 r0 = tin[k] - arc_center[k];
        const double a0 = std::atan2(r0.y, r0.x);
        const int n = std::max(1, static_cast<int>(std::ceil(sweep * corner_radius * samples_per_meter)));
        for (int j = 0; j < n; ++j) {
            const double a = a0 + sweep * static_cast<double>(j) / n;
            pts.push_back(arc_center[k] + Vec2{std::cos(a), std::sin(a)} * corner_radius);
        }
    };
    for (int k = 0; k < 3; ++k) {
        const int next = (k + 1) % 3;
        add_line(tout[k], tin[next]);
        add_arc(next);
    }
    return ReferencePath(std::move(pts), true);
}

Vec2 cubic_bspline_point(std::span<const Vec2> ctrl, double t) {
    const int m = static_cast<int>(ctrl.size());
    if (m < 4) {
        throw GeometryError("cubic B-spline needs at least 4 control points");
    }
    const int spans = m - 3;
    t = std::clamp(t, 0.0, static_cast<double>(spans));
    auto knot = [spans](int i) { return static_cast<double>(std::clamp(i - 3, 0, spans)); };
    const int k = std::clamp(3 + static_cast<int>(std::floor(t)), 3, m - 1);
    std::array<Vec2, 4> d{};
    for (int j = 0; j <= 3; ++j) {
        d[j] = ctrl[j + k - 3];
    }
    for (int r = 1; r <= 3; ++r) {
        for (int j = 3; j >= r; --j) {
            const double lo = knot(j + k - 3);
            const double hi = knot(j + 1 + k - r);
            const double alpha = hi > lo ? (t - lo) / (hi - lo) : 0.0;
            d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
        }
    }
    return d[3];
}

ReferencePath cubic_bspline(std::span<const Vec2> control_points, int samples_per_span) {
    if (control_points.size() < 4) {
        throw GeometryError("cubic B-spline needs at least 4 control points");
    }
    if (samples_per_span < 1) {
        throw GeometryError("cubic B-spline needs at least one sample per span");
    }
    const int spans = static_cast<int>(control_points.size()) - 3;
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(spans * samples_per_span + 1));
    for (int j = 0; j < spans; ++j) {
        for (int q = 0; q < samples_per_span; ++q) {
            pts.push_back(cubic_bspline_point(
                control_points, j + static_cast<double>(q) / samples_per_span));
        }
    }
    pts.push_back(cubic_bspline_point(control_points, spans));
    return ReferencePath(std::move(pts), false);
}

PathQuery project(const ReferencePath& path, const Vec2& p, std::optional<double> progress) {
    if (!progress) {
        return path.closest_point(p);
    }
    return path.closest_point_in_window(p, *progress - kProgressBack, kProgressBack + kProgressAhead);
}

HeadingRateCommand pure_pursuit_los(const UavState& s, const ReferencePath& path,
                                    const TrackerConfig& cfg, const VehicleParams& params,
                                    std::optional<double> progress) {
    const PathQuery q = project(path, s.position(), progress);
    const Vec2 target = path.point_at(q.arclength + cfg.lookahead);
    const Vec2 los = target - s.position();
    if (los.squared_norm() < 1e-18) {
        return {0.0};
    }
    const double bearing = std::atan2(los.y, los.x);
    return saturate(cfg.k_track * angle_difference(bearing, s.phi), params);
}

std::vector<UavState> tracking_rollout(const UavState& s, const ReferencePath& path,
                                       const TrackerConfig& cfg, const VehicleParams& params,
                                       int steps, std::optional<double> progress) {
    std::vector<UavState> out;
    out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    UavState cur = s;
    for (int k = 0; k < steps; ++k) {
        cur = step_rk2(cur, pure_pursuit_los(cur, path, cfg, params, progress), params);
        if (progress) {
            progress = project(path, cur.position(), progress).arclength;
        }
        out.push_back(cur);
    }
    return out;
}

void write_path_text(std::ostream& out, const ReferencePath& path) {
    const auto old_precision = out.precision(17);
    for (const Vec2& p : path.samples()) {
        out << p.x << ' ' << p.y << '\n';
    }
    out.precision(old_precision);
}

ReferencePath read_path_text(std::istream& in, bool closed) {
    std::vector<Vec2> pts;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream row(line);
        Vec2 p;
        if (!(row >> p.x >> p.y)) {
            throw ConfigError("path text line " + std::to_string(line_no) + ": expected \"x y\"");
        }
        pts.push_back(p);
    }
    return ReferencePath(std::move(pts), closed);
}

}  // namespace hca
