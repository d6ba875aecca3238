#include "hca/resolve_outer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "hca/errors.hpp"

namespace hca {
namespace {

constexpr double kScanStep = 0.5;        // m
constexpr double kValidationStep = 0.1;  // m

double free_space(const Vec2& p, std::span<const Obstacle> others, int skip_id) {
    double best = std::numeric_limits<double>::infinity();
    for (const Obstacle& o : others) {
        if (o.id != skip_id) {
            best = std::min(best, separation(p, o));
        }
    }
    return best;
}

}  // namespace

Subtargets generate_subtargets(const ReferencePath& path, const UavState& s,
                               const Obstacle& blocker, const RegionConfig& cfg,
                               const OuterMargins& margins, std::span<const Obstacle> others,
                               std::optional<double> progress) {
    const Vec2 pos = s.position();
    if (separation(pos, blocker) <= cfg.safe_radius) {
        throw PlanError("generate_subtargets: UAV is inside the inflated obstacle " +
                        std::to_string(blocker.id));
    }
    const double required = cfg.safe_radius + blocker.radius + margins.clearance_margin;
    const PathQuery own = project(path, pos, progress);

    // Blocked window, in unwrapped arclength starting at the UAV projection.
    bool inside = false;
    double s_a = 0.0;
    double s_b = 0.0;
    double s_c = 0.0;
    double c_min = std::numeric_limits<double>::infinity();
    const double scan_end = path.closed() ? std::min(margins.scan_length, path.length())
                                          : std::min(margins.scan_length, path.length() - own.arclength);
    for (double x = 0.0; x <= scan_end; x += kScanStep) {
        const double sx = own.arclength + x;
        const double c = distance(path.point_at(sx), blocker.position);
        if (c < required) {
            if (!inside) {
                inside = true;
                s_a = sx;
            }
            if (c < c_min) {
                c_min = c;
                s_c = sx;
            }
            s_b = sx;
        } else if (inside) {
            s_b = sx;
            break;
        }
    }
    Subtargets out;
    if (!inside) {
        return out;
    }

    const Vec2 foot = path.point_at(s_c);
    const Vec2 tangent = path.tangent_at(s_c);
    const double lateral = cross(tangent, blocker.position - foot);
    const double offset = (required - c_min) * margins.offset_gain;
    int side = 0;
    if (lateral > 1e-6) {
        side = -1;
    } else if (lateral < -1e-6) {
        side = +1;
    } else {
        const Vec2 n = left_normal(tangent);
        const double left_space = free_space(foot + n * offset, others, blocker.id);
        const double right_space = free_space(foot - n * offset, others, blocker.id);
        side = right_space > left_space + 1e-9 ? -1 : +1;
        spdlog::debug("outer: obstacle {} on the path centerline, deviating {}", blocker.id,
                      side > 0 ? "left" : "right");
    }

    auto shifted = [&](double sx) {
        const Vec2 p = path.point_at(sx);
        const Vec2 n = left_normal(path.tangent_at(sx)) * static_cast<double>(side);
        if (!margins.radial) {
            return p + n * offset;
        }
        const Vec2 away = p - blocker.position;
        const double r = away.norm();
        const double target = c_min + offset;
        if (r < 1e-6) {
            return blocker.position + n * target;
        }
        return r >= target ? p : blocker.position + away * (target / r);
    };

    const double lead = s_a - own.arclength;
    const double entry_s = own.arclength + std::min(margins.entry_length, 0.5 * lead);
    Vec2 entry = path.point_at(entry_s);
    if (distance(entry, pos) < 1.0) {
        entry = pos + heading_vector(s.phi) * std::max(1.0, 0.5 * margins.entry_length);
    }
    out.points.push_back(entry);
    out.first_subtarget = out.points.size();
    const double first = margins.spread > 0.0 ? std::max(s_c - margins.spread, entry_s + 1.0) : s_a;
    const double last = margins.spread > 0.0 ? s_c + margins.spread : s_b;
    if (last - first < 1.0) {
        out.points.push_back(shifted(s_c));
    } else {
        out.points.push_back(shifted(first));
        if (s_c - first > 0.5 && last - s_c > 0.5) {
            out.points.push_back(shifted(s_c));
        }
        out.points.push_back(shifted(last));
    }
    out.subtarget_count = out.points.size() - out.first_subtarget;
    const double exit_base = std::max(s_b, last);
    out.points.push_back(path.point_at(exit_base + 0.5 * margins.exit_length));
    out.points.push_back(path.point_at(exit_base + margins.exit_length));
    out.window_begin = path.normalize_arclength(s_a);
    out.window_end = path.normalize_arclength(s_b);
    out.rejoin_arclength = path.normalize_arclength(exit_base + margins.exit_length);
    out.side = side;
    out.offset = offset;
    return out;
}

double max_curvature(const ReferencePath& path) {
    const auto& p = path.samples();
    double best = 0.0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const Vec2 a = p[i] - p[i - 1];
        const Vec2 b = p[i + 1] - p[i];
        const double denom = a.norm() * b.norm() * (p[i + 1] - p[i - 1]).norm();
        if (denom > 0.0) {
            best = std::max(best, 2.0 * std::abs(cross(a, b)) / denom);
        }
    }
    return best;
}

double plan_clearance(const LocalPlan& plan, const Obstacle& o, double from) {
    double best = std::numeric_limits<double>::infinity();
    const auto& samples = plan.detour.samples();
    const auto& s = plan.detour.arclengths();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (s[i] >= from) {
            best = std::min(best, separation(samples[i], o));
        }
    }
    return best;
}

double flown_clearance(const LocalPlan& plan, const UavState& s, const Obstacle& o,
                       const TrackerConfig& tracker, const VehicleParams& params) {
    const double handback = plan.detour.length() - tracker.lookahead;
    UavState q = s;
    double progress = 0.0;
    double best = separation(q.position(), o);
    const int max_steps = static_cast<int>(std::ceil(2.0 * plan.detour.length() / (params.speed * params.period)));
    for (int k = 0; k < max_steps && progress < handback; ++k) {
        q = step_rk2(q, pure_pursuit_los(q, plan.detour, tracker, params, progress), params);
        progress = project(plan.detour, q.position(), progress).arclength;
        best = std::min(best, separation(q.position(), o));
    }
    return best;
}

LocalPlan replan(const UavState& s, const Subtargets& subtargets,
                 [[maybe_unused]] const ReferencePath& path,
                 const Obstacle& blocker, const RegionConfig& cfg, const VehicleParams& params) {
    LocalPlan plan;
    if (subtargets.empty()) {
        return plan;
    }
    std::vector<Vec2> ctrl;
    ctrl.reserve(subtargets.points.size() + 1);
    ctrl.push_back(s.position());
    ctrl.insert(ctrl.end(), subtargets.points.begin(), subtargets.points.end());
    double polygon = 0.0;
    for (std::size_t i = 1; i < ctrl.size(); ++i) {
        polygon += distance(ctrl[i - 1], ctrl[i]);
    }
    const int spans = static_cast<int>(ctrl.size()) - 3;
    const int per_span = std::max(8, static_cast<int>(std::ceil(polygon / spans / kValidationStep)));
    plan.detour = cubic_bspline(ctrl, per_span);
    plan.rejoin_arclength = subtargets.rejoin_arclength;
    plan.blocker_id = blocker.id;

    const double clearance = plan_clearance(plan, blocker);
    if (clearance < cfg.safe_radius) {
        throw PlanError("replan: detour passes " + std::to_string(clearance) +
                        " m from obstacle " + std::to_string(blocker.id));
    }
    const double kappa = max_curvature(plan.detour);
    if (kappa > params.omega_max / params.speed * (1.0 + 1e-9)) {
        throw PlanError("replan: detour curvature " + std::to_string(kappa) +
                        " 1/m exceeds the turn-rate limit");
    }
    plan.active = true;
    return plan;
}

std::optional<LocalPlan> plan_detour(const ReferencePath& path, const UavState& s,
                                     const Obstacle& blocker, const RegionConfig& cfg,
                                     const OuterMargins& margins, const VehicleParams& params,
                                     const TrackerConfig& tracker,
                                     std::span<const Obstacle> others,
                                     std::optional<double> progress) {
    // Layout variants in order of preference: full clearance margin first, then
    // the least lateral deviation.
    std::vector<OuterMargins> variants;
    for (double f : {1.0, 0.5, 0.0}) {
        for (bool radial : {false, true}) {
            for (double gain : {1.0, 1.25, 1.5, 1.75, 2.0, 2.25}) {
                for (double spread : {0.0, 40.0, 25.0}) {
                    for (double entry : {margins.entry_length, 25.0, 35.0}) {
                        for (double exit : {margins.exit_length, 0.5 * margins.exit_length}) {
                            OuterMargins m = margins;
                            m.clearance_margin = margins.clearance_margin * f;
                            m.radial = radial;
                            m.offset_gain = gain;
                            m.spread = spread;
                            m.entry_length = entry;
                            m.exit_length = exit;
                            variants.push_back(m);
                        }
                    }
                }
            }
        }
    }
    std::string last_error = "path not blocked";
    for (const OuterMargins& m : variants) {
        try {
            const Subtargets st = generate_subtargets(path, s, blocker, cfg, m, others, progress);
            if (st.empty()) {
                return std::nullopt;
            }
            LocalPlan plan = replan(s, st, path, blocker, cfg, params);
            if (plan_clearance(plan, blocker) < cfg.safe_radius + m.clearance_margin ||
                flown_clearance(plan, s, blocker, tracker, params) < cfg.safe_radius) {
                continue;
            }
            const bool clear_of_others = std::all_of(others.begin(), others.end(), [&](const Obstacle& o) {
                return o.id == blocker.id || (plan_clearance(plan, o) >= cfg.safe_radius &&
                                              flown_clearance(plan, s, o, tracker, params) >= cfg.safe_radius);
            });
            if (clear_of_others) {
                return plan;
            }
        } catch (const PlanError& e) {
            last_error = e.what();
        }
    }
    spdlog::debug("outer: no valid detour around obstacle {} ({})", blocker.id, last_error);
    return std::nullopt;
}

}  // namespace hca
