#include "hca/resolve_middle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "hca/errors.hpp"

namespace hca {

void DmpcConfig::validate(const VehicleParams& params) const {
    if (horizon <= 0 || segments <= 0) {
        throw ConfigError("dmpc.horizon and dmpc.segments must be > 0");
    }
    if (horizon % segments != 0) {
        throw ConfigError("dmpc.horizon must be divisible by dmpc.segments");
    }
    if (candidate_rates.empty()) {
        throw ConfigError("dmpc.candidate_rates must not be empty");
    }
    bool has_zero = false;
    for (double r : candidate_rates) {
        if (!std::isfinite(r) || std::abs(r) > params.omega_max) {
            throw ConfigError("dmpc.candidate_rates must lie within [-omega_max, omega_max]");
        }
        has_zero = has_zero || r == 0.0;
    }
    if (!has_zero) {
        throw ConfigError("dmpc.candidate_rates must include 0");
    }
    if (!(w_track >= 0.0) || !(w_effort >= 0.0) || !(w_sep >= 0.0) || !(margin_sep >= 0.0)) {
        throw ConfigError("dmpc weights and margin_sep must be >= 0");
    }
}

namespace {

struct StageSums {
    double tracking{0.0};
    double effort{0.0};
    double separation{0.0};
};

// Accumulates stage k into the running sums. cost() and solve() share this so
// both routes add terms in the same order.
inline void add_stage(StageSums& sums, std::size_t k, const Vec2& p, double u,
                      std::span<const Vec2> ref_positions,
                      std::span<const ThreatPrediction> predictions, double hinge_radius) {
    if (k < ref_positions.size()) {
        sums.tracking += (p - ref_positions[k]).squared_norm();
    }
    sums.effort += u * u;
    for (const ThreatPrediction& pred : predictions) {
        if (k < pred.positions.size()) {
            const double d = distance(p, pred.positions[k]) - pred.radius;
            const double h = std::max(0.0, hinge_radius - d);
            sums.separation += h * h;
        }
    }
}

CostBreakdown combine(const StageSums& sums, const DmpcConfig& cfg) {
    CostBreakdown c{cfg.w_track * sums.tracking, cfg.w_effort * sums.effort,
                    cfg.w_sep * sums.separation, 0.0};
    c.total = c.tracking + c.effort + c.separation;
    return c;
}

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool preferred(const CostBreakdown& c, std::size_t index, const CostBreakdown& best,
               std::size_t best_index) {
    if (!nearly_equal(c.total, best.total)) {
        return c.total < best.total;
    }
    if (!nearly_equal(c.effort, best.effort)) {
        return c.effort < best.effort;
    }
    return index < best_index;
}

}  // namespace

CostBreakdown cost(const UavState& s, std::span<const double> inputs,
                   std::span<const Vec2> ref_positions,
                   std::span<const ThreatPrediction> predictions, const DmpcConfig& cfg,
                   const VehicleParams& params, double safe_radius) {
    StageSums sums;
    const double hinge_radius = safe_radius + cfg.margin_sep;
    UavState cur = s;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        cur = step_rk2(cur, HeadingRateCommand{inputs[k]}, params);
        add_stage(sums, k, cur.position(), inputs[k], ref_positions, predictions, hinge_radius);
    }
    return combine(sums, cfg);
}

std::size_t candidate_count(const DmpcConfig& cfg) {
    std::size_t n = 1;
    for (int b = 0; b < cfg.segments; ++b) {
        n *= cfg.candidate_rates.size();
    }
    return n;
}

std::vector<double> candidate_sequence(std::size_t index, const DmpcConfig& cfg) {
    const std::size_t c = cfg.candidate_rates.size();
    const int block = cfg.horizon / cfg.segments;
    std::vector<double> out(static_cast<std::size_t>(cfg.horizon));
    for (int b = cfg.segments - 1; b >= 0; --b) {
        const double rate = cfg.candidate_rates[index % c];
        index /= c;
        std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(b) * block, block, rate);
    }
    return out;
}

namespace {

struct SearchContext {
    std::span<const Vec2> ref_positions;
    std::span<const ThreatPrediction> predictions;
    const DmpcConfig& cfg;
    const VehicleParams& params;
    double hinge_radius;
    int block;
    bool found{false};
    CostBreakdown best;
    std::size_t best_index{0};
    std::int64_t leaves{0};
};

void search(SearchContext& ctx, int depth, const UavState& state, const StageSums& sums,
            std::size_t index_prefix) {
    const std::size_t c = ctx.cfg.candidate_rates.size();
    for (std::size_t ci = 0; ci < c; ++ci) {
        const double u = ctx.cfg.candidate_rates[ci];
        UavState cur = state;
        StageSums acc = sums;
        const std::size_t k0 = static_cast<std::size_t>(depth) * static_cast<std::size_t>(ctx.block);
        for (int j = 0; j < ctx.block; ++j) {
            cur = step_rk2(cur, HeadingRateCommand{u}, ctx.params);
            add_stage(acc, k0 + static_cast<std::size_t>(j), cur.position(), u, ctx.ref_positions,
                      ctx.predictions, ctx.hinge_radius);
        }
        const std::size_t index = index_prefix * c + ci;
        if (depth + 1 < ctx.cfg.segments) {
            search(ctx, depth + 1, cur, acc, index);
            continue;
        }
        ++ctx.leaves;
        const CostBreakdown total = combine(acc, ctx.cfg);
        if (!ctx.found || preferred(total, index, ctx.best, ctx.best_index)) {
            ctx.found = true;
            ctx.best = total;
            ctx.best_index = index;
        }
    }
}

}  // namespace

SolveResult solve(const UavState& s, std::span<const Vec2> ref_positions,
                  std::span<const ThreatPrediction> predictions, const DmpcConfig& cfg,
                  const VehicleParams& params, double safe_radius) {
    SearchContext ctx{ref_positions, predictions, cfg, params, safe_radius + cfg.margin_sep,
                      cfg.horizon / cfg.segments, false, {}, 0, 0};
    search(ctx, 0, s, StageSums{}, 0);
    return {candidate_sequence(ctx.best_index, cfg), ctx.best, ctx.leaves, ctx.best_index};
}

std::vector<Vec2> reference_positions(const UavState& s, const ReferencePath& path,
                                      const VehicleParams& params, int horizon,
                                      std::optional<double> progress) {
    const PathQuery q = project(path, s.position(), progress);
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
    for (int k = 0; k < horizon; ++k) {
        out.push_back(path.point_at(q.arclength + params.speed * params.period * (k + 1)));
    }
    return out;
}

DmpcStepResult dmpc_step(const UavState& s, std::span<const ThreatPrediction> predictions,
                         const ReferencePath& path, const DmpcConfig& cfg,
                         const VehicleParams& params, const RegionConfig& regions, int owner,
                         std::int64_t cycle, std::optional<double> progress) {
    const std::vector<Vec2> ref = reference_positions(s, path, params, cfg.horizon, progress);
    SolveResult solved = solve(s, ref, predictions, cfg, params, regions.safe_radius);
    DmpcStepResult out;
    out.command = saturate(solved.inputs.front(), params);
    out.cost = solved.cost;
    out.sequence = PlannedSequence{owner, cycle, std::move(solved.inputs)};
    return out;
}

DmpcStepResult dmpc_step(const UavState& s, const AugmentedObstacleSet& set,
                         const ReferencePath& path, const DmpcConfig& cfg,
                         const VehicleParams& params, const RegionConfig& regions, int owner,
                         std::int64_t cycle, std::optional<double> progress) {
    const std::vector<ThreatPrediction> predictions = predict_threats(set, params, cfg.horizon);
    DmpcStepResult out = dmpc_step(s, predictions, path, cfg, params, regions, owner, cycle, progress);
    for (const NeighborSnapshot& n : set.neighbors) {
        if (!n.sequence) {
            ++out.fallback_neighbors;
            spdlog::debug("dmpc: uav {} has no sequence from neighbor {}, using reference extrapolation",
                          owner, n.id);
        }
    }
    return out;
}

}  // namespace hca
