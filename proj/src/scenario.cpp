#include "hca/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "hca/errors.hpp"

namespace hca {
namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
    if (!node.IsMap()) {
        throw ConfigError((where.empty() ? std::string("scenario") : where) + ": expected a mapping");
    }
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        bool known = false;
        for (std::string_view a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError(join(where, key) + ": unknown key");
        }
    }
}

template <typename T>
void read(const YAML::Node& node, const std::string& where, const char* key, T& out) {
    const YAML::Node v = node[key];
    if (!v) {
        return;
    }
    try {
        out = v.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(join(where, key) + ": invalid value '" + YAML::Dump(v) + "'");
    }
}

Vec2 read_vec2(const YAML::Node& v, const std::string& where) {
    if (!v.IsSequence() || v.size() != 2) {
        throw ConfigError(where + ": expected [x, y]");
    }
    try {
        return {v[0].as<double>(), v[1].as<double>()};
    } catch (const YAML::Exception&) {
        throw ConfigError(where + ": expected two numbers");
    }
}

double deg(double d) { return d * std::numbers::pi / 180.0; }

ReferencePath parse_path(const YAML::Node& n, const std::string& where,
                         const std::filesystem::path& base_dir) {
    std::string type = "triangle";
    read(n, where, "type", type);
    if (type == "triangle") {
        check_keys(n, where, {"type", "center", "length", "circumradius", "corner_radius",
                              "rotation_deg", "samples_per_meter"});
        Vec2 center{0.0, 0.0};
        if (n["center"]) {
            center = read_vec2(n["center"], where + ".center");
        }
        double corner = 40.0;
        double rotation = 0.0;
        double density = 1.0;
        double circumradius = 0.0;
        double length = 1500.0;
        read(n, where, "corner_radius", corner);
        read(n, where, "rotation_deg", rotation);
        read(n, where, "samples_per_meter", density);
        read(n, where, "length", length);
        read(n, where, "circumradius", circumradius);
        if (!(corner >= 0.0)) {
            throw ConfigError(where + ".corner_radius: must be >= 0");
        }
        if (!(density > 0.0)) {
            throw ConfigError(where + ".samples_per_meter: must be > 0");
        }
        if (circumradius <= 0.0) {
            if (!(length > 0.0)) {
                throw ConfigError(where + ".length: must be > 0");
            }
            circumradius = triangle_circumradius_for_length(length, corner);
        }
        if (!(circumradius > 2.0 * corner)) {
            throw ConfigError(where + ".corner_radius: too large for the triangle");
        }
        return build_triangle_like_path(center, circumradius, corner, density, deg(rotation));
    }
    if (type == "file") {
        check_keys(n, where, {"type", "file", "closed"});
        std::string file;
        bool closed = true;
        read(n, where, "file", file);
        read(n, where, "closed", closed);
        std::filesystem::path p(file);
        if (p.is_relative()) {
            p = base_dir / p;
        }
        std::ifstream in(p);
        if (!in) {
            throw ConfigError(where + ".file: cannot read '" + p.string() + "'");
        }
        try {
            return read_path_text(in, closed);
        } catch (const std::exception& e) {
            throw ConfigError(where + ".file: " + e.what());
        }
    }
    if (type == "points") {
        check_keys(n, where, {"type", "points", "closed"});
        bool closed = false;
        read(n, where, "closed", closed);
        const YAML::Node pts = n["points"];
        if (!pts || !pts.IsSequence()) {
            throw ConfigError(where + ".points: expected a list of [x, y]");
        }
        std::vector<Vec2> samples;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            samples.push_back(read_vec2(pts[i], where + ".points[" + std::to_string(i) + "]"));
        }
        try {
            return ReferencePath(std::move(samples), closed);
        } catch (const std::exception& e) {
            throw ConfigError(where + ".points: " + e.what());
        }
    }
    throw ConfigError(where + ".type: expected triangle, file or points, got '" + type + "'");
}

}  // namespace

Scenario parse_scenario(std::string_view yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scenario: YAML syntax error: ") + e.what());
    }
    Scenario sc;
    if (!root || root.IsNull()) {
        throw ConfigError("scenario: empty document");
    }
    check_keys(root, "", {"vehicle", "regions", "sensing", "dmpc", "reactive", "tracker", "outer",
                          "layers", "strategy", "cycles", "seed", "engine", "bus", "paths",
                          "initial_states", "obstacles"});

    if (const YAML::Node n = root["vehicle"]) {
        check_keys(n, "vehicle", {"speed", "omega_max", "period"});
        read(n, "vehicle", "speed", sc.vehicle.speed);
        read(n, "vehicle", "omega_max", sc.vehicle.omega_max);
        read(n, "vehicle", "period", sc.vehicle.period);
    }
    if (const YAML::Node n = root["regions"]) {
        check_keys(n, "regions", {"safe_radius", "inner_radius", "middle_radius", "outer_radius",
                                  "warning_time", "middle_margin", "tracking_margin", "slow_speed"});
        read(n, "regions", "safe_radius", sc.regions.safe_radius);
        read(n, "regions", "inner_radius", sc.regions.inner_radius);
        read(n, "regions", "middle_radius", sc.regions.middle_radius);
        read(n, "regions", "outer_radius", sc.regions.outer_radius);
        read(n, "regions", "warning_time", sc.regions.warning_time);
        read(n, "regions", "middle_margin", sc.regions.middle_margin);
        read(n, "regions", "tracking_margin", sc.regions.tracking_margin);
        read(n, "regions", "slow_speed", sc.regions.slow_speed);
    }
    if (const YAML::Node n = root["sensing"]) {
        check_keys(n, "sensing", {"mode", "perceptible_radius", "p_outer", "p_middle", "p_inner",
                                  "seed", "memory_cycles"});
        std::string mode = std::string(to_string(sc.sensing.mode));
        read(n, "sensing", "mode", mode);
        sc.sensing.mode = parse_sensing_mode(mode);
        read(n, "sensing", "perceptible_radius", sc.sensing.perceptible_radius);
        read(n, "sensing", "p_outer", sc.sensing.p_outer);
        read(n, "sensing", "p_middle", sc.sensing.p_middle);
        read(n, "sensing", "p_inner", sc.sensing.p_inner);
        read(n, "sensing", "seed", sc.sensing.seed);
        read(n, "sensing", "memory_cycles", sc.sensing.memory_cycles);
    }
    if (const YAML::Node n = root["dmpc"]) {
        check_keys(n, "dmpc", {"horizon", "segments", "candidate_rates", "w_track", "w_effort",
                               "w_sep", "margin_sep"});
        read(n, "dmpc", "horizon", sc.dmpc.horizon);
        read(n, "dmpc", "segments", sc.dmpc.segments);
        read(n, "dmpc", "candidate_rates", sc.dmpc.candidate_rates);
        read(n, "dmpc", "w_track", sc.dmpc.w_track);
        read(n, "dmpc", "w_effort", sc.dmpc.w_effort);
        read(n, "dmpc", "w_sep", sc.dmpc.w_sep);
        read(n, "dmpc", "margin_sep", sc.dmpc.margin_sep);
    }
    if (const YAML::Node n = root["reactive"]) {
        check_keys(n, "reactive", {"k_psi", "direction_rule"});
        read(n, "reactive", "k_psi", sc.reactive.k_psi);
        std::string rule = std::string(to_string(sc.reactive.direction_rule));
        read(n, "reactive", "direction_rule", rule);
        if (rule == "right-hand" || rule == "right_hand") {
            sc.reactive.direction_rule = DirectionRule::right_hand;
        } else if (rule == "farthest-side" || rule == "farthest_side") {
            sc.reactive.direction_rule = DirectionRule::farthest_side;
        } else {
            throw ConfigError("reactive.direction_rule: expected right-hand or farthest-side, got '" +
                              rule + "'");
        }
    }
    if (const YAML::Node n = root["tracker"]) {
        check_keys(n, "tracker", {"lookahead", "k_track"});
        read(n, "tracker", "lookahead", sc.tracker.lookahead);
        read(n, "tracker", "k_track", sc.tracker.k_track);
    }
    if (const YAML::Node n = root["outer"]) {
        check_keys(n, "outer", {"clearance_margin", "entry_length", "exit_length", "scan_length"});
        read(n, "outer", "clearance_margin", sc.outer.clearance_margin);
        read(n, "outer", "entry_length", sc.outer.entry_length);
        read(n, "outer", "exit_length", sc.outer.exit_length);
        read(n, "outer", "scan_length", sc.outer.scan_length);
    }
    if (const YAML::Node n = root["layers"]) {
        check_keys(n, "layers", {"inner", "middle", "outer"});
        read(n, "layers", "inner", sc.layers.inner);
        read(n, "layers", "middle", sc.layers.middle);
        read(n, "layers", "outer", sc.layers.outer);
    }
    if (root["strategy"]) {
        std::string s;
        read(root, "", "strategy", s);
        sc.strategy = parse_strategy(s);
    }
    read(root, "", "cycles", sc.cycles);
    read(root, "", "seed", sc.seed);
    if (const YAML::Node n = root["engine"]) {
        check_keys(n, "engine", {"parallel", "threads"});
        read(n, "engine", "parallel", sc.engine.parallel);
        read(n, "engine", "threads", sc.engine.threads);
    }
    if (const YAML::Node n = root["bus"]) {
        check_keys(n, "bus", {"mode", "base_port", "max_stale_cycles"});
        std::string mode = "in-process";
        read(n, "bus", "mode", mode);
        if (mode == "in-process" || mode == "in_process") {
            sc.bus.mode = BusMode::in_process;
        } else if (mode == "udp") {
            sc.bus.mode = BusMode::udp;
        } else {
            throw ConfigError("bus.mode: expected in-process or udp, got '" + mode + "'");
        }
        read(n, "bus", "base_port", sc.bus.base_port);
        read(n, "bus", "max_stale_cycles", sc.bus.max_stale_cycles);
    }

    const YAML::Node paths = root["paths"];
    if (!paths || !paths.IsSequence() || paths.size() == 0) {
        throw ConfigError("paths: expected a non-empty list");
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        sc.paths.push_back(parse_path(paths[i], "paths[" + std::to_string(i) + "]", base_dir));
    }

    if (const YAML::Node n = root["initial_states"]) {
        if (n.IsScalar()) {
            if (n.as<std::string>() != "random") {
                throw ConfigError("initial_states: expected 'random' or a list of {x, y, phi_deg}");
            }
        } else if (n.IsSequence()) {
            for (std::size_t i = 0; i < n.size(); ++i) {
                const std::string where = "initial_states[" + std::to_string(i) + "]";
                check_keys(n[i], where, {"x", "y", "phi_deg"});
                UavState s;
                double phi_deg = 0.0;
                read(n[i], where, "x", s.x);
                read(n[i], where, "y", s.y);
                read(n[i], where, "phi_deg", phi_deg);
                s.phi = wrap_angle(deg(phi_deg));
                sc.initial_states.push_back(s);
            }
        } else {
            throw ConfigError("initial_states: expected 'random' or a list");
        }
    }

    if (const YAML::Node n = root["obstacles"]) {
        if (!n.IsSequence()) {
            throw ConfigError("obstacles: expected a list");
        }
        for (std::size_t i = 0; i < n.size(); ++i) {
            const std::string where = "obstacles[" + std::to_string(i) + "]";
            check_keys(n[i], where, {"id", "motion", "cooperative", "known", "position", "velocity",
                                     "radius", "reverse_after_s"});
            Obstacle o;
            o.id = 1000 + static_cast<int>(i);
            read(n[i], where, "id", o.id);
            std::string motion = "static";
            read(n[i], where, "motion", motion);
            if (motion == "static") {
                o.motion = MotionClass::static_object;
            } else if (motion == "dynamic") {
                o.motion = MotionClass::dynamic_object;
            } else {
                throw ConfigError(where + ".motion: expected static or dynamic, got '" + motion + "'");
            }
            read(n[i], where, "cooperative", o.cooperative);
            read(n[i], where, "known", o.known);
            if (!n[i]["position"]) {
                throw ConfigError(where + ".position: required");
            }
            o.position = read_vec2(n[i]["position"], where + ".position");
            if (n[i]["velocity"]) {
                o.velocity = read_vec2(n[i]["velocity"], where + ".velocity");
            }
            read(n[i], where, "radius", o.radius);
            ObstacleScript script;
            read(n[i], where, "reverse_after_s", script.reverse_period);
            sc.obstacles.push_back(o);
            sc.scripts.push_back(script);
        }
    }
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot read scenario file '" + file.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str(), file.parent_path().empty() ? std::filesystem::current_path()
                                                                    : file.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

}  // namespace hca
