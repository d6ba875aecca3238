#include "hca/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hca/errors.hpp"

namespace hca {

void RegionConfig::validate() const {
    if (!(safe_radius > 0.0 && safe_radius < inner_radius && inner_radius < middle_radius &&
          middle_radius < outer_radius) ||
        !std::isfinite(outer_radius)) {
        throw ConfigError("regions: radii must satisfy 0 < safe_radius < inner_radius < middle_radius < outer_radius");
    }
    if (!(warning_time > 0.0)) {
        throw ConfigError("regions.warning_time must be > 0");
    }
    if (!(middle_margin >= 0.0)) {
        throw ConfigError("regions.middle_margin must be >= 0");
    }
    if (!(tracking_margin >= 0.0)) {
        throw ConfigError("regions.tracking_margin must be >= 0");
    }
    if (!(slow_speed >= 0.0)) {
        throw ConfigError("regions.slow_speed must be >= 0");
    }
}

std::string_view to_string(Region r) {
    switch (r) {
        case Region::collision: return "collision";
        case Region::inner: return "inner";
        case Region::middle: return "middle";
        case Region::outer: return "outer";
        case Region::clear: return "clear";
    }
    return "clear";
}

Region classify_region(double d, const RegionConfig& cfg) {
    if (!(d >= 0.0)) {
        throw GeometryError("classify_region: distance must be >= 0");
    }
    if (d <= cfg.safe_radius) {
        return Region::collision;
    }
    if (d <= cfg.inner_radius) {
        return Region::inner;
    }
    if (d <= cfg.middle_radius) {
        return Region::middle;
    }
    if (d <= cfg.outer_radius) {
        return Region::outer;
    }
    return Region::clear;
}

namespace {

bool by_urgency(const Threat& a, const Threat& b) {
    if (a.time_to_min != b.time_to_min) {
        return a.time_to_min < b.time_to_min;
    }
    return a.id < b.id;
}

struct Member {
    int id;
    ThreatKind kind;
    Vec2 position;
    Vec2 velocity;
    double radius;
};

std::vector<Member> members_of(const AugmentedObstacleSet& set) {
    std::vector<Member> out;
    out.reserve(set.size());
    for (const NeighborSnapshot& n : set.neighbors) {
        out.push_back({n.id, ThreatKind::neighbor, n.state.position(), n.velocity, 0.0});
    }
    for (const Obstacle& o : set.sensed) {
        out.push_back({o.id, ThreatKind::obstacle, o.position, o.velocity, o.radius});
    }
    return out;
}

}  // namespace

std::vector<ThreatPrediction> predict_threats(const AugmentedObstacleSet& set,
                                              const VehicleParams& params, int horizon) {
    std::vector<ThreatPrediction> out;
    out.reserve(set.size());
    const auto constant_velocity = [&](Vec2 p, Vec2 v) {
        std::vector<Vec2> pts(static_cast<std::size_t>(std::max(horizon, 0)));
        for (int k = 0; k < horizon; ++k) {
            pts[static_cast<std::size_t>(k)] = p + v * ((k + 1) * params.period);
        }
        return pts;
    };
    for (const NeighborSnapshot& n : set.neighbors) {
        ThreatPrediction pred{n.id, ThreatKind::neighbor, n.state.position(), n.velocity, 0.0, {}};
        if (n.sequence && n.sequence->inputs.size() > 1) {
            const auto& inputs = n.sequence->inputs;
            const std::size_t count =
                std::min(inputs.size() - 1, static_cast<std::size_t>(std::max(horizon, 0)));
            const auto states = rollout(n.state, std::span(inputs).subspan(1, count), params);
            for (const UavState& st : states) {
                pred.positions.push_back(st.position());
            }
        } else if (n.lookahead && !n.lookahead->empty()) {
            const std::size_t count =
                std::min(n.lookahead->size(), static_cast<std::size_t>(std::max(horizon, 0)));
            pred.positions.assign(n.lookahead->begin(),
                                  n.lookahead->begin() + static_cast<std::ptrdiff_t>(count));
        } else {
            pred.positions = constant_velocity(pred.position, pred.velocity);
        }
        out.push_back(std::move(pred));
    }
    for (const Obstacle& o : set.sensed) {
        out.push_back({o.id, ThreatKind::obstacle, o.position, o.velocity, o.radius,
                       constant_velocity(o.position, o.velocity)});
    }
    return out;
}

InnerDetection detect_inner(const UavState& s, const AugmentedObstacleSet& set,
                            const RegionConfig& cfg, const VehicleParams& params) {
    InnerDetection result;
    const Vec2 own_p = s.position();
    const Vec2 own_v = velocity_of(s, params);
    for (const Member& m : members_of(set)) {
        const Vec2 rel_p = m.position - own_p;
        const double d = rel_p.norm() - m.radius;
        if (!(d > cfg.safe_radius && d <= cfg.inner_radius)) {
            continue;
        }
        const Vec2 rel_v = m.velocity - own_v;
        const double closing_rate = dot(rel_p, rel_v);
        if (!(closing_rate < 0.0)) {
            continue;
        }
        const double t_star = std::clamp(-closing_rate / rel_v.squared_norm(), 0.0, cfg.warning_time);
        const double min_sep = (rel_p + rel_v * t_star).norm() - m.radius;
        if (min_sep <= cfg.safe_radius) {
            result.threats.push_back(
                {m.id, m.kind, m.position, m.velocity, m.radius, d, min_sep, t_star});
        }
    }
    std::sort(result.threats.begin(), result.threats.end(), by_urgency);
    result.flag = !result.threats.empty();
    return result;
}

MiddleDetection detect_middle(const UavState& s, std::span<const UavState> own_planned,
                              std::span<const ThreatPrediction> predictions,
                              const RegionConfig& cfg, const VehicleParams& params) {
    MiddleDetection result;
    const Vec2 own_p = s.position();
    const double limit = cfg.safe_radius + cfg.middle_margin;
    for (const ThreatPrediction& pred : predictions) {
        const double d0 = distance(own_p, pred.position) - pred.radius;
        if (d0 > cfg.middle_radius) {
            continue;
        }
        double best = d0;
        std::size_t best_k = 0;
        const std::size_t steps = std::min(own_planned.size(), pred.positions.size());
        for (std::size_t k = 0; k < steps; ++k) {
            const double d = distance(own_planned[k].position(), pred.positions[k]) - pred.radius;
            if (d < best) {
                best = d;
                best_k = k + 1;
            }
        }
        if (best <= limit) {
            result.threats.push_back({pred.id, pred.kind, pred.position, pred.velocity, pred.radius,
                                      d0, best, static_cast<double>(best_k) * params.period});
        }
    }
    std::sort(result.threats.begin(), result.threats.end(), by_urgency);
    result.flag = !result.threats.empty();
    return result;
}

OuterDetection detect_outer(const UavState& s, const ReferencePath& path,
                            std::span<const Obstacle> sensed, const RegionConfig& cfg,
                            std::optional<double> progress) {
    OuterDetection result;
    const Vec2 p = s.position();
    const PathQuery own = project(path, p, progress);
    double best_ahead = 0.0;
    for (const Obstacle& o : sensed) {
        if (o.velocity.norm() >= cfg.slow_speed) {
            continue;
        }
        const double d = separation(p, o);
        if (!(d > cfg.middle_radius && d <= cfg.outer_radius)) {
            continue;
        }
        const PathQuery hit = path.closest_point_in_window(o.position, own.arclength, cfg.outer_radius);
        if (hit.distance > cfg.safe_radius + o.radius + cfg.tracking_margin) {
            continue;
        }
        double ahead = hit.arclength - own.arclength;
        if (path.closed() && ahead < 0.0) {
            ahead += path.length();
        }
        if (!result.flag || ahead < best_ahead ||
            (ahead == best_ahead && o.id < result.blocker->id)) {
            result.flag = true;
            result.blocker = o;
            result.blocker_path_clearance = hit.distance;
            best_ahead = ahead;
        }
    }
    return result;
}

ConflictFlags detect_all(const UavState& s, const AugmentedObstacleSet& set,
                         std::span<const ThreatPrediction> predictions,
                         std::span<const UavState> own_planned, const ReferencePath& path,
                         const RegionConfig& cfg, const VehicleParams& params,
                         std::optional<double> progress) {
    ConflictFlags flags;
    InnerDetection inner = detect_inner(s, set, cfg, params);
    MiddleDetection middle = detect_middle(s, own_planned, predictions, cfg, params);
    OuterDetection outer = detect_outer(s, path, set.sensed, cfg, progress);

    const Vec2 own_p = s.position();
    std::vector<Threat> colliding;
    for (const Member& m : members_of(set)) {
        const double d = distance(own_p, m.position) - m.radius;
        if (d <= cfg.safe_radius) {
            colliding.push_back({m.id, m.kind, m.position, m.velocity, m.radius, d, d, 0.0});
        }
    }
    flags.collision = !colliding.empty();
    if (flags.collision) {
        std::sort(colliding.begin(), colliding.end(),
                  [](const Threat& a, const Threat& b) { return a.id < b.id; });
        colliding.insert(colliding.end(), inner.threats.begin(), inner.threats.end());
        inner.threats = std::move(colliding);
    }
    flags.inner = inner.flag || flags.collision;
    flags.inner_threats = std::move(inner.threats);
    flags.middle = middle.flag;
    flags.middle_threats = std::move(middle.threats);
    flags.outer = outer.flag;
    flags.outer_blocker = std::move(outer.blocker);
    return flags;
}

}  // namespace hca
