// hca: run one scenario or the strategy/sensing comparison grid.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "hca/engine.hpp"
#include "hca/errors.hpp"
#include "hca/experiment.hpp"
#include "hca/scenario.hpp"

namespace fs = std::filesystem;

namespace {

// Writes to a sibling temporary and renames, so the target is either complete or absent.
void write_atomic(const fs::path& target, const std::string& content) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

struct Overrides {
    std::string strategy;
    std::string sensing;
    std::int64_t cycles{0};
    std::uint64_t seed{0};
    bool seed_set{false};
    bool udp{false};
    bool parallel{false};
};

void apply(hca::Scenario& sc, const Overrides& o) {
    if (!o.strategy.empty()) {
        sc.strategy = hca::parse_strategy(o.strategy);
    }
    if (!o.sensing.empty()) {
        sc.sensing.mode = hca::parse_sensing_mode(o.sensing);
    }
    if (o.cycles != 0) {
        sc.cycles = o.cycles;
    }
    if (o.seed_set) {
        sc.seed = o.seed;
    }
    if (o.udp) {
        sc.bus.mode = hca::BusMode::udp;
    }
    if (o.parallel) {
        sc.engine.parallel = true;
    }
    sc.validate();
}

int run_command(const fs::path& scenario_path, const Overrides& o, const fs::path& out_dir) {
    hca::Scenario sc = hca::load_scenario(scenario_path);
    apply(sc, o);
    const hca::RunResult result = hca::run(sc);
    fs::create_directories(out_dir);
    std::ostringstream csv;
    hca::write_trajectory_csv(csv, result.log);
    write_atomic(out_dir / "trajectory.csv", csv.str());
    write_atomic(out_dir / "metrics.json", hca::metrics_json(result.metrics));
    write_atomic(out_dir / "plot_data.json", hca::plot_data_json(sc, result));
    const auto& m = result.metrics;
    std::printf("%s/%s seed %llu: failures %lld, avg collision-free distance %s m, min separation %.2f m\n",
                std::string(hca::to_string(m.strategy)).c_str(),
                std::string(hca::to_string(m.sensing)).c_str(),
                static_cast<unsigned long long>(m.seed), static_cast<long long>(m.failures),
                std::isinf(m.avg_collision_free_distance)
                    ? "inf"
                    : std::to_string(m.avg_collision_free_distance).c_str(),
                m.min_separation);
    return 0;
}

int compare_command(const fs::path& scenario_path, const Overrides& o,
                    const std::vector<std::uint64_t>& seeds, int jobs, const fs::path& out_dir) {
    hca::Scenario sc = hca::load_scenario(scenario_path);
    apply(sc, o);
    const auto tables = hca::compare(sc, seeds, jobs);
    fs::create_directories(out_dir);
    write_atomic(out_dir / "summary.csv", hca::summary_csv(tables));
    write_atomic(out_dir / "summary.json", hca::summary_json(tables));
    std::cout << hca::summary_csv(tables);
    for (const auto& t : tables) {
        for (const auto& r : t.rows) {
            if (!r.error.empty()) {
                return 3;
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical multi-UAV collision avoidance simulator"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    fs::path scenario;
    fs::path out_dir = "out";
    Overrides o;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto* run = app.add_subcommand("run", "Simulate one scenario");
    run->add_option("--scenario", scenario, "Scenario YAML file")->required();
    run->add_option("--strategy", o.strategy, "hierarchical or dmpc-only")
        ->check(CLI::IsMember({"hierarchical", "dmpc-only"}));
    run->add_option("--seed", o.seed, "Scenario seed")->each([&](const std::string&) { o.seed_set = true; });
    run->add_option("--cycles", o.cycles, "Control cycles")->check(CLI::PositiveNumber);
    run->add_option("--sensing", o.sensing, "deterministic or probabilistic")
        ->check(CLI::IsMember({"deterministic", "probabilistic"}));
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--udp", o.udp, "Exchange messages over loopback UDP");
    run->add_flag("--parallel", o.parallel, "Evaluate agents concurrently");

    auto* cmp = app.add_subcommand("compare", "Both strategies, both sensing modes, every seed");
    cmp->add_option("--scenario", scenario, "Scenario YAML file")->required();
    cmp->add_option("--seeds", seeds, "Seeds, one test row each (space or comma separated)")
        ->expected(1, -1)
        ->delimiter(',');
    cmp->add_option("--cycles", o.cycles, "Control cycles")->check(CLI::PositiveNumber);
    cmp->add_option("--out", out_dir, "Output directory");
    cmp->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    cmp->add_flag("--udp", o.udp, "Exchange messages over loopback UDP");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));
    if (o.udp && cmp->parsed()) {
        jobs = 1;  // one socket set at a time
    }
    try {
        if (run->parsed()) {
            return run_command(scenario, o, out_dir);
        }
        return compare_command(scenario, o, seeds, jobs, out_dir);
    } catch (const hca::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
