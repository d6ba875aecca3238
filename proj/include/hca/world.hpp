#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hca/geometry.hpp"
#include "hca/kinematics.hpp"
#include "hca/messages.hpp"

namespace hca {

struct RegionConfig;

enum class MotionClass { static_object, dynamic_object };

/// World object tagged with the static/dynamic, cooperative and known flags.
struct Obstacle {
    int id{0};
    MotionClass motion{MotionClass::static_object};
    bool cooperative{false};
    bool known{false};
    Vec2 position;
    Vec2 velocity;   // zero for static objects
    double radius{0.0};

    void validate() const;
    bool operator==(const Obstacle&) const = default;
};

/// Separation between a point and an obstacle: center distance minus radius.
inline double separation(const Vec2& p, const Obstacle& o) {
    return distance(p, o.position) - o.radius;
}

enum class SensingMode { deterministic, probabilistic };

struct SensingConfig {
    double perceptible_radius{100.0};  // R_d, m
    SensingMode mode{SensingMode::deterministic};
    double p_outer{0.70};
    double p_middle{0.85};
    double p_inner{1.0};
    std::uint64_t seed{0};
    int memory_cycles{0};

    void validate(const RegionConfig& regions) const;
};

/// Seeded uniform stream for one (agent, cycle). Bit-reproducible across platforms:
/// the engine is std::mt19937_64 and doubles are taken from the top 53 bits.
class DetectionStream {
public:
    DetectionStream(std::uint64_t seed, int agent, std::int64_t cycle);
    explicit DetectionStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t value);

/// Detection probability for an object at separation d.
double detection_probability(double d, const SensingConfig& cfg, const RegionConfig& regions);

/// Objects perceived this cycle. One uniform is drawn per world object, in list
/// order, whether or not it is in range; an object is included iff draw < p(d).
std::vector<Obstacle> sense(std::span<const Obstacle> world, const UavState& s,
                            const SensingConfig& cfg, const RegionConfig& regions,
                            DetectionStream& rng);

/// Optional detection persistence: an object sensed within the last
/// `memory_cycles` cycles stays in the sensed list, extrapolated at its last
/// sensed velocity.
class SensingMemory {
public:
    std::vector<Obstacle> update(std::vector<Obstacle> sensed, std::int64_t cycle,
                                 int memory_cycles, double period);

private:
    struct Entry {
        Obstacle snapshot;
        std::int64_t cycle;
    };
    std::map<int, Entry> entries_;
};

/// Neighbor as seen through the bus.
struct NeighborSnapshot {
    int id{-1};
    std::int64_t cycle{0};
    UavState state;
    Vec2 velocity;
    std::optional<PlannedSequence> sequence;
    std::optional<std::vector<Vec2>> lookahead;
};

/// Neighbor UAVs plus sensed environmental objects.
struct AugmentedObstacleSet {
    std::vector<NeighborSnapshot> neighbors;
    std::vector<Obstacle> sensed;

    std::size_t size() const { return neighbors.size() + sensed.size(); }
    bool empty() const { return neighbors.empty() && sensed.empty(); }
};

/// Newest message per sender wins; `self_id` and sensed objects whose id
/// collides with a neighbor are dropped so every id is unique.
AugmentedObstacleSet augmented_set(std::span<const StateMessage> neighbor_msgs,
                                   std::vector<Obstacle> sensed, int self_id = -1);

}  // namespace hca
