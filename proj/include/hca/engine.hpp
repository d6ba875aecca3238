#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hca/detection.hpp"
#include "hca/kinematics.hpp"
#include "hca/paths.hpp"
#include "hca/resolve_inner.hpp"
#include "hca/resolve_middle.hpp"
#include "hca/resolve_outer.hpp"
#include "hca/world.hpp"

namespace hca {

enum class Strategy { hierarchical, dmpc_only };
enum class Layer { nominal, outer, middle, inner };

std::string_view to_string(Strategy s);
std::string_view to_string(Layer l);
std::string_view to_string(SensingMode m);
Strategy parse_strategy(std::string_view text);
SensingMode parse_sensing_mode(std::string_view text);

/// Switches for individual layers; a disabled layer's flag is cleared before arbitration.
struct EnabledLayers {
    bool inner{true};
    bool middle{true};
    bool outer{true};
};

enum class BusMode { in_process, udp };

struct BusConfig {
    BusMode mode{BusMode::in_process};
    int base_port{47000};
    int max_stale_cycles{10};
};

struct EngineConfig {
    bool parallel{false};
    int threads{0};  // 0: hardware concurrency
};

/// A dynamic obstacle reverses its velocity every `reverse_period` seconds when > 0.
struct ObstacleScript {
    double reverse_period{0.0};
};

struct Scenario {
    VehicleParams vehicle;
    RegionConfig regions;
    SensingConfig sensing;
    DmpcConfig dmpc;
    ReactiveConfig reactive;
    TrackerConfig tracker;
    OuterMargins outer;
    EnabledLayers layers;
    Strategy strategy{Strategy::hierarchical};
    std::vector<ReferencePath> paths;
    std::vector<UavState> initial_states;  // empty: random non-conflicting points on the paths
    std::vector<Obstacle> obstacles;
    std::vector<ObstacleScript> scripts;   // parallel to obstacles, may be shorter
    std::int64_t cycles{5000};
    std::uint64_t seed{0};
    EngineConfig engine;
    BusConfig bus;

    std::size_t uav_count() const { return paths.size(); }
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct LayerCounts {
    std::int64_t nominal{0};
    std::int64_t outer{0};
    std::int64_t middle{0};
    std::int64_t inner{0};
};

struct Metrics {
    Strategy strategy{Strategy::hierarchical};
    SensingMode sensing{SensingMode::deterministic};
    std::uint64_t seed{0};
    std::int64_t cycles{0};
    std::int64_t failures{0};
    std::vector<std::int64_t> failures_per_uav;
    std::vector<double> distance_flown;  // per UAV, m
    double distance_per_uav{0.0};        // mean of distance_flown, m
    double avg_collision_free_distance{std::numeric_limits<double>::infinity()};
    double min_separation{std::numeric_limits<double>::infinity()};
    LayerCounts layer_cycles;
    std::int64_t detours_planned{0};
    std::int64_t detour_failures{0};
    std::int64_t sequence_fallbacks{0};  // neighbor predictions made without a received sequence
};

/// One trajectory-log row: the pose at the start of the cycle and what was applied.
struct LogRow {
    std::int64_t cycle{0};
    int uav{0};
    UavState state;
    double omega{0.0};
    Layer layer{Layer::nominal};
    bool inner{false};
    bool middle{false};
    bool outer{false};
    double min_separation{0.0};
};

struct RunResult {
    Metrics metrics;
    std::vector<LogRow> log;               // cycle-major, UAV-minor
    std::vector<std::vector<Vec2>> tracks;  // per UAV, one point per cycle plus the final pose
};

/// hierarchical: inner > middle > outer > nominal. dmpc-only: middle whenever
/// inner or middle is set, else nominal.
Layer arbitrate(const ConflictFlags& flags, Strategy strategy);

/// Episodes in one separation trace: a failure is counted on each cycle the
/// separation drops to <= safe_radius after having been above it.
std::int64_t count_failures(std::span<const double> trace, double safe_radius);

/// distance / failures rounded to 2 decimals; +infinity when failures == 0.
double avg_collision_free_distance(double distance_per_uav, std::int64_t failures);

/// Reproducible placement: for each path a random arclength, redrawn until every
/// pairwise UAV distance and every UAV-obstacle separation exceeds R_o.
std::vector<UavState> random_initial_states(const Scenario& scenario);

/// Closed-loop simulation. Deterministic for a given scenario in both serial
/// and parallel modes when the bus is in-process.
RunResult run(const Scenario& scenario);

void write_trajectory_csv(std::ostream& out, std::span<const LogRow> log);
std::string metrics_json(const Metrics& m);
std::string plot_data_json(const Scenario& scenario, const RunResult& result);

}  // namespace hca
