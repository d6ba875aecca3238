#include "hca/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hca/detection.hpp"
#include "hca/errors.hpp"

namespace hca {

void Obstacle::validate() const {
    const std::string where = "obstacle " + std::to_string(id);
    if (!std::isfinite(position.x) || !std::isfinite(position.y) ||
        !std::isfinite(velocity.x) || !std::isfinite(velocity.y)) {
        throw ConfigError(where + ": position/velocity must be finite");
    }
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw ConfigError(where + ".radius must be >= 0");
    }
    if (motion == MotionClass::static_object && velocity.squared_norm() != 0.0) {
        throw ConfigError(where + ".velocity must be zero for a static obstacle");
    }
}

void SensingConfig::validate(const RegionConfig& regions) const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError(std::string("sensing.") + name + " must lie in [0, 1]");
        }
    };
    prob(p_outer, "p_outer");
    prob(p_middle, "p_middle");
    prob(p_inner, "p_inner");
    if (!(p_outer <= p_middle && p_middle <= p_inner)) {
        throw ConfigError("sensing: probabilities must satisfy p_outer <= p_middle <= p_inner");
    }
    if (!(perceptible_radius >= regions.outer_radius) || !std::isfinite(perceptible_radius)) {
        throw ConfigError("sensing.perceptible_radius must be >= regions.outer_radius");
    }
    if (memory_cycles < 0) {
        throw ConfigError("sensing.memory_cycles must be >= 0");
    }
}

std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

DetectionStream::DetectionStream(std::uint64_t seed, int agent, std::int64_t cycle)
    : engine_(mix_seed(mix_seed(mix_seed(seed) ^ static_cast<std::uint64_t>(agent)) ^
                       static_cast<std::uint64_t>(cycle))) {}

double detection_probability(double d, const SensingConfig& cfg, const RegionConfig& regions) {
    if (d > cfg.perceptible_radius) {
        return 0.0;
    }
    if (cfg.mode == SensingMode::deterministic) {
        return 1.0;
    }
    if (d <= regions.inner_radius) {
        return cfg.p_inner;
    }
    if (d <= regions.middle_radius) {
        return cfg.p_middle;
    }
    return cfg.p_outer;
}

std::vector<Obstacle> sense(std::span<const Obstacle> world, const UavState& s,
                            const SensingConfig& cfg, const RegionConfig& regions,
                            DetectionStream& rng) {
    std::vector<Obstacle> out;
    const Vec2 p = s.position();
    for (const Obstacle& o : world) {
        const double draw = rng.uniform();
        const double d = std::max(0.0, separation(p, o));
        if (draw < detection_probability(d, cfg, regions)) {
            out.push_back(o);
        }
    }
    return out;
}

std::vector<Obstacle> SensingMemory::update(std::vector<Obstacle> sensed, std::int64_t cycle,
                                            int memory_cycles, double period) {
    if (memory_cycles <= 0) {
        return sensed;
    }
    for (const Obstacle& o : sensed) {
        entries_[o.id] = {o, cycle};
    }
    for (auto it = entries_.begin(); it != entries_.end();) {
        const std::int64_t age = cycle - it->second.cycle;
        if (age > memory_cycles) {
            it = entries_.erase(it);
            continue;
        }
        if (age > 0) {
            Obstacle held = it->second.snapshot;
            held.position += held.velocity * (static_cast<double>(age) * period);
            sensed.push_back(held);
        }
        ++it;
    }
    std::sort(sensed.begin(), sensed.end(),
              [](const Obstacle& a, const Obstacle& b) { return a.id < b.id; });
    return sensed;
}

AugmentedObstacleSet augmented_set(std::span<const StateMessage> neighbor_msgs,
                                   std::vector<Obstacle> sensed, int self_id) {
    std::map<int, const StateMessage*> newest;
    for (const StateMessage& m : neighbor_msgs) {
        if (m.sender == self_id) {
            continue;
        }
        auto [it, inserted] = newest.emplace(m.sender, &m);
        if (!inserted && m.cycle >= it->second->cycle) {
            it->second = &m;
        }
    }
    AugmentedObstacleSet set;
    set.neighbors.reserve(newest.size());
    for (const auto& [id, m] : newest) {
        set.neighbors.push_back({m->sender, m->cycle, m->state, m->velocity, m->sequence,
                                 m->lookahead});
    }
    std::map<int, Obstacle> unique_sensed;
    for (Obstacle& o : sensed) {
        if (o.id == self_id || newest.contains(o.id)) {
            continue;
        }
        unique_sensed.insert_or_assign(o.id, std::move(o));
    }
    set.sensed.reserve(unique_sensed.size());
    for (auto& [id, o] : unique_sensed) {
        set.sensed.push_back(std::move(o));
    }
    return set;
}

}  // namespace hca
