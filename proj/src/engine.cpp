#include "hca/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hca/bus.hpp"
#include "hca/errors.hpp"

namespace hca {

std::string_view to_string(Strategy s) {
    return s == Strategy::hierarchical ? "hierarchical" : "dmpc-only";
}

std::string_view to_string(Layer l) {
    switch (l) {
        case Layer::nominal: return "nominal";
        case Layer::outer: return "outer";
        case Layer::middle: return "middle";
        case Layer::inner: return "inner";
    }
    return "nominal";
}

std::string_view to_string(SensingMode m) {
    return m == SensingMode::deterministic ? "deterministic" : "probabilistic";
}

Strategy parse_strategy(std::string_view text) {
    if (text == "hierarchical") {
        return Strategy::hierarchical;
    }
    if (text == "dmpc-only" || text == "dmpc_only") {
        return Strategy::dmpc_only;
    }
    throw ConfigError("strategy: expected hierarchical or dmpc-only, got '" + std::string(text) + "'");
}

SensingMode parse_sensing_mode(std::string_view text) {
    if (text == "deterministic") {
        return SensingMode::deterministic;
    }
    if (text == "probabilistic") {
        return SensingMode::probabilistic;
    }
    throw ConfigError("sensing.mode: expected deterministic or probabilistic, got '" +
                      std::string(text) + "'");
}

void Scenario::validate() const {
    vehicle.validate();
    regions.validate();
    sensing.validate(regions);
    dmpc.validate(vehicle);
    reactive.validate();
    tracker.validate();
    if (!(outer.clearance_margin >= 0.0) || !(outer.entry_length > 0.0) ||
        !(outer.exit_length > 0.0) || !(outer.scan_length > 0.0)) {
        throw ConfigError("outer: margins and lengths must be positive");
    }
    if (paths.empty()) {
        throw ConfigError("paths: at least one path is required");
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (paths[i].empty()) {
            throw ConfigError("paths[" + std::to_string(i) + "]: empty path");
        }
    }
    if (!initial_states.empty() && initial_states.size() != paths.size()) {
        throw ConfigError("initial_states: expected one state per path (" +
                          std::to_string(paths.size()) + "), got " +
                          std::to_string(initial_states.size()));
    }
    std::set<int> ids;
    for (const Obstacle& o : obstacles) {
        o.validate();
        if (o.id >= 0 && static_cast<std::size_t>(o.id) < paths.size()) {
            throw ConfigError("obstacle " + std::to_string(o.id) + ".id collides with a UAV id");
        }
        if (!ids.insert(o.id).second) {
            throw ConfigError("obstacle " + std::to_string(o.id) + ".id is not unique");
        }
    }
    if (scripts.size() > obstacles.size()) {
        throw ConfigError("obstacles: more motion scripts than obstacles");
    }
    for (const ObstacleScript& sc : scripts) {
        if (!(sc.reverse_period >= 0.0)) {
            throw ConfigError("obstacles: reverse_after_s must be >= 0");
        }
    }
    if (cycles <= 0) {
        throw ConfigError("cycles must be > 0");
    }
    if (bus.max_stale_cycles < 0) {
        throw ConfigError("bus.max_stale_cycles must be >= 0");
    }
    if (bus.base_port <= 0 || bus.base_port + static_cast<int>(paths.size()) > 65535) {
        throw ConfigError("bus.base_port out of range");
    }
    if (engine.threads < 0) {
        throw ConfigError("engine.threads must be >= 0");
    }
}

Layer arbitrate(const ConflictFlags& flags, Strategy strategy) {
    if (strategy == Strategy::dmpc_only) {
        return flags.inner || flags.middle ? Layer::middle : Layer::nominal;
    }
    if (flags.inner) {
        return Layer::inner;
    }
    if (flags.middle) {
        return Layer::middle;
    }
    if (flags.outer) {
        return Layer::outer;
    }
    return Layer::nominal;
}

std::int64_t count_failures(std::span<const double> trace, double safe_radius) {
    std::int64_t n = 0;
    bool inside = false;
    for (double d : trace) {
        const bool now = d <= safe_radius;
        if (now && !inside) {
            ++n;
        }
        inside = now;
    }
    return n;
}

double avg_collision_free_distance(double distance_per_uav, std::int64_t failures) {
    if (failures <= 0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::round(distance_per_uav / static_cast<double>(failures) * 100.0) / 100.0;
}

std::vector<UavState> random_initial_states(const Scenario& scenario) {
    DetectionStream rng(mix_seed(scenario.seed ^ 0x5eed'1a7e'0000'0001ULL));
    std::vector<UavState> out;
    constexpr int kAttempts = 100000;
    for (std::size_t i = 0; i < scenario.paths.size(); ++i) {
        const ReferencePath& path = scenario.paths[i];
        bool placed = false;
        for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
            const double s = rng.uniform() * path.length();
            const Vec2 p = path.point_at(s);
            bool ok = true;
            for (const UavState& other : out) {
                ok = ok && distance(p, other.position()) > scenario.regions.outer_radius;
            }
            for (const Obstacle& o : scenario.obstacles) {
                ok = ok && separation(p, o) > scenario.regions.outer_radius;
            }
            if (ok) {
                const Vec2 t = path.tangent_at(s);
                out.push_back({p.x, p.y, std::atan2(t.y, t.x)});
                placed = true;
            }
        }
        if (!placed) {
            throw ConfigError("initial_states: no non-conflicting start point found on paths[" +
                              std::to_string(i) + "]");
        }
    }
    return out;
}

namespace {

struct Agent {
    int id{0};
    const ReferencePath* reference{nullptr};
    UavState state;
    std::optional<LocalPlan> plan;
    SensingMemory memory;
    std::vector<UavState> nominal;  // tracking rollout from `state`
    std::map<int, std::int64_t> detour_retry_after;
    double distance{0.0};
    double ref_progress{0.0};   // projection arclength on the reference
    double plan_progress{0.0};  // same on the active detour
};

struct Decision {
    double omega{0.0};
    Layer layer{Layer::nominal};
    bool inner{false};
    bool middle{false};
    bool outer{false};
    UavState next;
    std::optional<PlannedSequence> sequence;
    bool planned{false};
    bool plan_failed{false};
    int fallbacks{0};
};

constexpr int kDetourRetryCycles = 10;

const ReferencePath& tracked_path(const Agent& a) {
    return a.plan ? a.plan->detour : *a.reference;
}

double tracked_progress(const Agent& a) {
    return a.plan ? a.plan_progress : a.ref_progress;
}

class Simulation {
public:
    Simulation(const Scenario& sc, Bus& bus) : sc_(sc), bus_(bus), world_(sc.obstacles) {
        const std::vector<UavState> starts =
            sc.initial_states.empty() ? random_initial_states(sc) : sc.initial_states;
        agents_.resize(sc.paths.size());
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            Agent& a = agents_[i];
            a.id = static_cast<int>(i);
            a.reference = &sc.paths[i];
            a.state = starts[i];
            a.ref_progress = a.reference->closest_point(a.state.position()).arclength;
            a.nominal = tracking_rollout(a.state, *a.reference, sc.tracker, sc.vehicle, sc.dmpc.horizon,
                                         a.ref_progress);
        }
        reverse_every_.assign(world_.size(), 0);
        for (std::size_t j = 0; j < sc.scripts.size(); ++j) {
            if (sc.scripts[j].reverse_period > 0.0) {
                reverse_every_[j] = std::max<std::int64_t>(
                    1, std::llround(sc.scripts[j].reverse_period / sc.vehicle.period));
            }
        }
        const std::size_t n = agents_.size();
        violating_.assign(n, std::vector<char>(n + world_.size(), 0));
        result_.metrics.strategy = sc.strategy;
        result_.metrics.sensing = sc.sensing.mode;
        result_.metrics.seed = sc.seed;
        result_.metrics.cycles = sc.cycles;
        result_.metrics.failures_per_uav.assign(n, 0);
        result_.tracks.assign(n, {});
        result_.log.reserve(static_cast<std::size_t>(sc.cycles) * n);
    }

    RunResult run() {
        const std::size_t n = agents_.size();
        std::vector<Decision> decisions(n);
        unsigned workers = 1;
        if (sc_.engine.parallel) {
            workers = sc_.engine.threads > 0 ? static_cast<unsigned>(sc_.engine.threads)
                                             : std::max(1u, std::thread::hardware_concurrency());
            workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
        }
        for (std::int64_t k = 0; k < sc_.cycles; ++k) {
            const std::vector<double> min_sep = account(k);
            if (workers <= 1) {
                for (std::size_t i = 0; i < n; ++i) {
                    decisions[i] = decide(agents_[i], k);
                }
            } else {
                std::vector<std::jthread> pool;
                for (unsigned w = 0; w < workers; ++w) {
                    pool.emplace_back([&, w] {
                        for (std::size_t i = w; i < n; i += workers) {
                            decisions[i] = decide(agents_[i], k);
                        }
                    });
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                commit(agents_[i], decisions[i], k, min_sep[i]);
            }
            advance_world(k);
        }
        for (std::size_t i = 0; i < n; ++i) {
            result_.tracks[i].push_back(agents_[i].state.position());
        }
        finish();
        return std::move(result_);
    }

private:
    // Ground-truth separations at the start of cycle k; failure episodes per directed pair.
    std::vector<double> account(std::int64_t k) {
        const std::size_t n = agents_.size();
        std::vector<double> min_sep(n, std::numeric_limits<double>::infinity());
        Metrics& m = result_.metrics;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 p = agents_[i].state.position();
            for (std::size_t j = 0; j < n + world_.size(); ++j) {
                if (j == i) {
                    continue;
                }
                const double d = j < n ? distance(p, agents_[j].state.position())
                                       : separation(p, world_[j - n]);
                min_sep[i] = std::min(min_sep[i], d);
                const bool now = d <= sc_.regions.safe_radius;
                if (now && !violating_[i][j]) {
                    ++m.failures;
                    ++m.failures_per_uav[i];
                    spdlog::debug("cycle {}: uav {} breached R_s against {} ({:.2f} m)", k, i,
                                  j < n ? static_cast<int>(j) : world_[j - n].id, d);
                }
                violating_[i][j] = now;
            }
            m.min_separation = std::min(m.min_separation, min_sep[i]);
        }
        return min_sep;
    }

    Decision decide(Agent& a, std::int64_t k) {
        Decision out;
        const UavState s = a.state;
        DetectionStream stream(sc_.sensing.seed ^ sc_.seed, a.id, k);
        std::vector<Obstacle> sensed = sense(world_, s, sc_.sensing, sc_.regions, stream);
        sensed = a.memory.update(std::move(sensed), k, sc_.sensing.memory_cycles, sc_.vehicle.period);
        const std::vector<StateMessage> msgs = bus_.collect(a.id, k);
        const AugmentedObstacleSet set = augmented_set(msgs, sensed, a.id);
        const std::vector<ThreatPrediction> predictions =
            predict_threats(set, sc_.vehicle, sc_.dmpc.horizon);
        ConflictFlags flags =
            detect_all(s, set, predictions, a.nominal, *a.reference, sc_.regions, sc_.vehicle,
                       a.ref_progress);
        if (!sc_.layers.inner) {
            flags.inner = false;
        }
        if (!sc_.layers.middle) {
            flags.middle = false;
        }
        if (!sc_.layers.outer || sc_.strategy == Strategy::dmpc_only) {
            flags.outer = false;
        }
        out.inner = flags.inner;
        out.middle = flags.middle;
        out.outer = flags.outer;
        out.layer = arbitrate(flags, sc_.strategy);

        double omega = 0.0;
        switch (out.layer) {
            case Layer::inner: {
                std::vector<Threat> threats = flags.inner_threats;
                if (threats.empty()) {
                    threats = flags.middle_threats;
                }
                omega = threats.empty() ? track(a, s) : inner_resolve(s, threats, sc_.reactive, sc_.vehicle).omega;
                break;
            }
            case Layer::middle: {
                DmpcStepResult r = dmpc_step(s, predictions, tracked_path(a), sc_.dmpc, sc_.vehicle,
                                             sc_.regions, a.id, k, tracked_progress(a));
                for (const NeighborSnapshot& nb : set.neighbors) {
                    out.fallbacks += nb.sequence ? 0 : 1;
                }
                omega = r.command.omega;
                out.sequence = std::move(r.sequence);
                break;
            }
            case Layer::outer:
                handle_outer(a, s, *flags.outer_blocker, sensed, k, out);
                omega = track(a, s);
                break;
            case Layer::nominal:
                omega = track(a, s);
                break;
        }
        out.omega = saturate(omega, sc_.vehicle).omega;
        out.next = step_rk2(s, HeadingRateCommand{out.omega}, sc_.vehicle);
        return out;
    }

    double track(const Agent& a, const UavState& s) const {
        return pure_pursuit_los(s, tracked_path(a), sc_.tracker, sc_.vehicle, tracked_progress(a)).omega;
    }

    void handle_outer(Agent& a, const UavState& s, const Obstacle& blocker,
                      const std::vector<Obstacle>& sensed, std::int64_t k, Decision& out) {
        if (a.plan) {
            if (a.plan->blocker_id == blocker.id) {
                return;
            }
            const PathQuery q = project(a.plan->detour, s.position(), a.plan_progress);
            if (plan_clearance(*a.plan, blocker, q.arclength) >=
                sc_.regions.safe_radius + 0.5 * sc_.outer.clearance_margin) {
                return;
            }
        }
        const auto retry = a.detour_retry_after.find(blocker.id);
        if (retry != a.detour_retry_after.end() && k < retry->second) {
            return;
        }
        std::optional<LocalPlan> plan;
        try {
            plan = plan_detour(*a.reference, s, blocker, sc_.regions, sc_.outer, sc_.vehicle, sc_.tracker,
                               sensed, a.ref_progress);
        } catch (const PlanError& e) {
            spdlog::debug("uav {}: {}", a.id, e.what());
        }
        if (plan) {
            a.plan = std::move(plan);
            a.plan_progress = 0.0;
            out.planned = true;
        } else {
            a.detour_retry_after[blocker.id] = k + kDetourRetryCycles;
            out.plan_failed = true;
        }
    }

    void commit(Agent& a, Decision& d, std::int64_t k, double min_sep) {
        Metrics& m = result_.metrics;
        result_.log.push_back({k, a.id, a.state, d.omega, d.layer, d.inner, d.middle, d.outer, min_sep});
        result_.tracks[static_cast<std::size_t>(a.id)].push_back(a.state.position());
        switch (d.layer) {
            case Layer::nominal: ++m.layer_cycles.nominal; break;
            case Layer::outer: ++m.layer_cycles.outer; break;
            case Layer::middle: ++m.layer_cycles.middle; break;
            case Layer::inner: ++m.layer_cycles.inner; break;
        }
        m.detours_planned += d.planned ? 1 : 0;
        m.detour_failures += d.plan_failed ? 1 : 0;
        m.sequence_fallbacks += d.fallbacks;

        a.distance += distance(a.state.position(), d.next.position());
        a.state = d.next;
        a.ref_progress = project(*a.reference, a.state.position(), a.ref_progress).arclength;
        if (a.plan) {
            const PathQuery q = project(a.plan->detour, a.state.position(), a.plan_progress);
            a.plan_progress = q.arclength;
            if (q.arclength >= a.plan->detour.length() - sc_.tracker.lookahead ||
                q.distance > 2.0 * sc_.tracker.lookahead) {
                a.plan.reset();
            }
        }
        a.nominal = tracking_rollout(a.state, tracked_path(a), sc_.tracker, sc_.vehicle, sc_.dmpc.horizon,
                                     tracked_progress(a));

        StateMessage msg;
        msg.sender = a.id;
        msg.cycle = k;
        msg.state = a.state;
        msg.velocity = velocity_of(a.state, sc_.vehicle);
        msg.sequence = std::move(d.sequence);
        std::vector<Vec2> ahead;
        ahead.reserve(a.nominal.size());
        for (const UavState& st : a.nominal) {
            ahead.push_back(st.position());
        }
        msg.lookahead = std::move(ahead);
        bus_.publish(msg);
    }

    void advance_world(std::int64_t k) {
        for (std::size_t j = 0; j < world_.size(); ++j) {
            Obstacle& o = world_[j];
            if (o.motion != MotionClass::dynamic_object) {
                continue;
            }
            o.position = o.position + o.velocity * sc_.vehicle.period;
            if (reverse_every_[j] > 0 && (k + 1) % reverse_every_[j] == 0) {
                o.velocity = o.velocity * -1.0;
            }
        }
    }

    void finish() {
        Metrics& m = result_.metrics;
        double total = 0.0;
        for (const Agent& a : agents_) {
            m.distance_flown.push_back(a.distance);
            total += a.distance;
        }
        m.distance_per_uav = total / static_cast<double>(agents_.size());
        m.avg_collision_free_distance = avg_collision_free_distance(m.distance_per_uav, m.failures);
    }

    const Scenario& sc_;
    Bus& bus_;
    std::vector<Obstacle> world_;
    std::vector<std::int64_t> reverse_every_;
    std::vector<Agent> agents_;
    std::vector<std::vector<char>> violating_;
    RunResult result_;
};

}  // namespace

RunResult run(const Scenario& scenario) {
    scenario.validate();
    std::vector<int> roster(scenario.uav_count());
    for (std::size_t i = 0; i < roster.size(); ++i) {
        roster[i] = static_cast<int>(i);
    }
    std::unique_ptr<Bus> bus;
    if (scenario.bus.mode == BusMode::udp) {
        bus = std::make_unique<UdpBus>(roster, scenario.bus.base_port, scenario.bus.max_stale_cycles);
    } else {
        bus = std::make_unique<InProcessBus>(roster, scenario.bus.max_stale_cycles);
    }
    Simulation sim(scenario, *bus);
    return sim.run();
}

namespace {

std::string number(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::ordered_json finite_or_marker(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

void write_trajectory_csv(std::ostream& out, std::span<const LogRow> log) {
    out << "cycle,uav_id,x,y,phi,omega_cmd,layer_tag,inner,middle,outer,min_separation_m\n";
    for (const LogRow& r : log) {
        out << r.cycle << ',' << r.uav << ',' << number(r.state.x) << ',' << number(r.state.y) << ','
            << number(r.state.phi) << ',' << number(r.omega) << ',' << to_string(r.layer) << ','
            << int(r.inner) << ',' << int(r.middle) << ',' << int(r.outer) << ','
            << number(r.min_separation) << '\n';
    }
}

std::string metrics_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["strategy"] = to_string(m.strategy);
    j["sensing"] = to_string(m.sensing);
    j["seed"] = m.seed;
    j["cycles"] = m.cycles;
    j["failures"] = m.failures;
    j["failures_per_uav"] = m.failures_per_uav;
    j["distance_flown_m"] = m.distance_flown;
    j["distance_per_uav_m"] = m.distance_per_uav;
    j["avg_collision_free_distance_m"] = finite_or_marker(m.avg_collision_free_distance);
    j["min_separation_m"] = finite_or_marker(m.min_separation);
    j["layer_cycles"] = {{"nominal", m.layer_cycles.nominal},
                         {"outer", m.layer_cycles.outer},
                         {"middle", m.layer_cycles.middle},
                         {"inner", m.layer_cycles.inner}};
    j["detours_planned"] = m.detours_planned;
    j["detour_failures"] = m.detour_failures;
    j["sequence_fallbacks"] = m.sequence_fallbacks;
    return j.dump(2) + "\n";
}

std::string plot_data_json(const Scenario& scenario, const RunResult& result) {
    using nlohmann::ordered_json;
    auto polyline = [](const std::vector<Vec2>& pts) {
        ordered_json a = ordered_json::array();
        for (const Vec2& p : pts) {
            a.push_back({p.x, p.y});
        }
        return a;
    };
    ordered_json j;
    j["strategy"] = to_string(result.metrics.strategy);
    j["sensing"] = to_string(result.metrics.sensing);
    j["regions"] = {{"safe", scenario.regions.safe_radius},
                    {"inner", scenario.regions.inner_radius},
                    {"middle", scenario.regions.middle_radius},
                    {"outer", scenario.regions.outer_radius}};
    j["paths"] = ordered_json::array();
    for (const ReferencePath& p : scenario.paths) {
        ordered_json entry = {{"closed", p.closed()}, {"points", polyline(p.samples())}};
        j["paths"].push_back(std::move(entry));
    }
    j["tracks"] = ordered_json::array();
    for (const auto& t : result.tracks) {
        j["tracks"].push_back(polyline(t));
    }
    j["obstacles"] = ordered_json::array();
    for (const Obstacle& o : scenario.obstacles) {
        j["obstacles"].push_back({{"id", o.id},
                                  {"dynamic", o.motion == MotionClass::dynamic_object},
                                  {"cooperative", o.cooperative},
                                  {"known", o.known},
                                  {"x", o.position.x},
                                  {"y", o.position.y},
                                  {"vx", o.velocity.x},
                                  {"vy", o.velocity.y},
                                  {"radius", o.radius}});
    }
    return j.dump() + "\n";
}

}  // namespace hca
