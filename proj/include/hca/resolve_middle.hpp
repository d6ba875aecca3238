#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hca/detection.hpp"
#include "hca/kinematics.hpp"
#include "hca/paths.hpp"
#include "hca/world.hpp"

namespace hca {

/// Receding-horizon settings. Sequences are piecewise constant: `segments`
/// blocks of horizon/segments equal inputs, each drawn from candidate_rates.
struct DmpcConfig {
    int horizon{20};
    int segments{4};
    std::vector<double> candidate_rates{-0.6, -0.3, 0.0, 0.3, 0.6};
    double w_track{1.0};    // 1/m^2
    double w_effort{10.0};  // s^2/rad^2
    double w_sep{200.0};    // 1/m^2
    double margin_sep{5.0};  // m

    /// horizon divisible by segments; every candidate within the rate bound; 0 included.
    void validate(const VehicleParams& params) const;
};

struct CostBreakdown {
    double tracking{0.0};
    double effort{0.0};
    double separation{0.0};
    double total{0.0};
};

/// J = w_track * sum |p(k) - ref(k)|^2 + w_effort * sum u(k)^2
///   + w_sep * sum_k sum_threats max(0, R_s + margin_sep - d(k))^2
/// where p(k) is the state after k+1 inputs, ref(k) the matching reference
/// point, and d(k) the predicted separation to a threat. Threat terms stop at
/// the end of the shorter of the two horizons.
CostBreakdown cost(const UavState& s, std::span<const double> inputs,
                   std::span<const Vec2> ref_positions,
                   std::span<const ThreatPrediction> predictions, const DmpcConfig& cfg,
                   const VehicleParams& params, double safe_radius);

struct SolveResult {
    std::vector<double> inputs;
    CostBreakdown cost;
    std::int64_t rollouts{0};   // leaves of the enumeration (candidate sequences)
    std::size_t index{0};       // enumeration index of the chosen sequence
};

/// Exhaustive search over all |candidates|^segments sequences in lexicographic
/// order (first block most significant). Minimum total cost wins; near-equal
/// totals prefer lower effort, then the earlier sequence.
SolveResult solve(const UavState& s, std::span<const Vec2> ref_positions,
                  std::span<const ThreatPrediction> predictions, const DmpcConfig& cfg,
                  const VehicleParams& params, double safe_radius);

/// Expands the enumeration index into its full input sequence.
std::vector<double> candidate_sequence(std::size_t index, const DmpcConfig& cfg);

/// Number of candidate sequences, |candidates|^segments.
std::size_t candidate_count(const DmpcConfig& cfg);

/// Reference points the tracker would visit over the horizon: the path point
/// speed*period*(k+1) past the UAV's projection (see project()).
std::vector<Vec2> reference_positions(const UavState& s, const ReferencePath& path,
                                      const VehicleParams& params, int horizon,
                                      std::optional<double> progress = std::nullopt);

struct DmpcStepResult {
    HeadingRateCommand command;
    PlannedSequence sequence;
    CostBreakdown cost;
    int fallback_neighbors{0};  // neighbors predicted without a received sequence
};

/// One middle-layer cycle: predictions from the augmented set, solve, first input
/// for actuation and the full sequence for broadcast.
DmpcStepResult dmpc_step(const UavState& s, const AugmentedObstacleSet& set,
                         const ReferencePath& path, const DmpcConfig& cfg,
                         const VehicleParams& params, const RegionConfig& regions, int owner,
                         std::int64_t cycle, std::optional<double> progress = std::nullopt);

/// Same, with predictions already built by the caller.
DmpcStepResult dmpc_step(const UavState& s, std::span<const ThreatPrediction> predictions,
                         const ReferencePath& path, const DmpcConfig& cfg,
                         const VehicleParams& params, const RegionConfig& regions, int owner,
                         std::int64_t cycle, std::optional<double> progress = std::nullopt);

}  // namespace hca
