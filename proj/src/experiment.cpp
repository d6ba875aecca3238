#include "hca/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace hca {
namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string fmt_distance(double v) {
    if (std::isinf(v)) {
        return "inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

nlohmann::ordered_json distance_json(double v) {
    if (std::isinf(v)) {
        return "inf";
    }
    return round2(v);
}

}  // namespace

void summarize(CompareTable& t) {
    t.sum_failures_dmpc = 0;
    t.sum_failures_hierarchical = 0;
    double avg_d = 0.0;
    double avg_h = 0.0;
    int complete = 0;
    for (const CompareRow& r : t.rows) {
        if (!r.dmpc_only || !r.hierarchical) {
            continue;
        }
        ++complete;
        t.sum_failures_dmpc += r.dmpc_only->failures;
        t.sum_failures_hierarchical += r.hierarchical->failures;
        avg_d += r.dmpc_only->avg_collision_free_distance;
        avg_h += r.hierarchical->avg_collision_free_distance;
    }
    if (complete == 0) {
        t.mean_failures_dmpc = t.mean_failures_hierarchical = 0.0;
        t.mean_avg_distance_dmpc = t.mean_avg_distance_hierarchical = 0.0;
        return;
    }
    t.mean_failures_dmpc = static_cast<double>(t.sum_failures_dmpc) / complete;
    t.mean_failures_hierarchical = static_cast<double>(t.sum_failures_hierarchical) / complete;
    t.mean_avg_distance_dmpc = std::isinf(avg_d) ? avg_d : round2(avg_d / complete);
    t.mean_avg_distance_hierarchical = std::isinf(avg_h) ? avg_h : round2(avg_h / complete);
}

std::vector<CompareTable> compare(const Scenario& base, std::span<const std::uint64_t> seeds,
                                  int jobs) {
    const SensingMode modes[] = {SensingMode::deterministic, SensingMode::probabilistic};
    const Strategy strategies[] = {Strategy::dmpc_only, Strategy::hierarchical};
    std::vector<CompareTable> tables(2);
    for (int m = 0; m < 2; ++m) {
        tables[m].sensing = modes[m];
        for (std::uint64_t seed : seeds) {
            tables[m].rows.push_back({seed, std::nullopt, std::nullopt, {}});
        }
    }
    // Every (mode, seed, strategy) combination is independent and writes its own slot.
    const std::size_t total = 2 * seeds.size() * 2;
    std::vector<std::optional<Metrics>> results(total);
    std::vector<std::string> errors(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            const std::size_t m = job / (seeds.size() * 2);
            const std::size_t rest = job % (seeds.size() * 2);
            const std::size_t si = rest / 2;
            Scenario sc = base;
            sc.sensing.mode = modes[m];
            sc.strategy = strategies[rest % 2];
            sc.seed = seeds[si];
            try {
                results[job] = run(sc).metrics;
            } catch (const std::exception& e) {
                errors[job] = std::string(to_string(sc.strategy)) + ": " + e.what();
                spdlog::error("compare: seed {} ({}, {}) failed: {}", sc.seed, to_string(sc.sensing.mode),
                              to_string(sc.strategy), e.what());
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < n; ++i) {
            pool.emplace_back(worker);
        }
    }
    for (std::size_t job = 0; job < total; ++job) {
        const std::size_t m = job / (seeds.size() * 2);
        const std::size_t rest = job % (seeds.size() * 2);
        CompareRow& row = tables[m].rows[rest / 2];
        (rest % 2 == 0 ? row.dmpc_only : row.hierarchical) = results[job];
        if (!errors[job].empty()) {
            row.error += (row.error.empty() ? "" : "; ") + errors[job];
        }
    }
    for (CompareTable& t : tables) {
        summarize(t);
    }
    return tables;
}

std::string summary_csv(std::span<const CompareTable> tables) {
    std::string out =
        "sensing,row,seed,failures_dmpc_only,failures_hierarchical,"
        "avg_distance_dmpc_only_m,avg_distance_hierarchical_m,error\n";
    for (const CompareTable& t : tables) {
        const std::string mode(to_string(t.sensing));
        int i = 1;
        for (const CompareRow& r : t.rows) {
            out += mode + ",Test " + std::to_string(i++) + "," + std::to_string(r.seed) + ",";
            out += (r.dmpc_only ? std::to_string(r.dmpc_only->failures) : "") + ",";
            out += (r.hierarchical ? std::to_string(r.hierarchical->failures) : "") + ",";
            out += (r.dmpc_only ? fmt_distance(r.dmpc_only->avg_collision_free_distance) : "") + ",";
            out += (r.hierarchical ? fmt_distance(r.hierarchical->avg_collision_free_distance) : "") + ",";
            out += "\"" + r.error + "\"\n";
        }
        out += mode + ",Summation,," + std::to_string(t.sum_failures_dmpc) + "," +
               std::to_string(t.sum_failures_hierarchical) + ",,,\"\"\n";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f,%.2f", t.mean_failures_dmpc, t.mean_failures_hierarchical);
        out += mode + ",Mean,," + buf + "," + fmt_distance(t.mean_avg_distance_dmpc) + "," +
               fmt_distance(t.mean_avg_distance_hierarchical) + ",\"\"\n";
    }
    return out;
}

std::string summary_json(std::span<const CompareTable> tables) {
    using nlohmann::ordered_json;
    ordered_json root = ordered_json::array();
    for (const CompareTable& t : tables) {
        ordered_json rows = ordered_json::array();
        for (const CompareRow& r : t.rows) {
            ordered_json row;
            row["seed"] = r.seed;
            row["failures"] = {{"dmpc-only", r.dmpc_only ? ordered_json(r.dmpc_only->failures) : nullptr},
                               {"hierarchical",
                                r.hierarchical ? ordered_json(r.hierarchical->failures) : nullptr}};
            row["avg_collision_free_distance_m"] = {
                {"dmpc-only", r.dmpc_only ? distance_json(r.dmpc_only->avg_collision_free_distance) : nullptr},
                {"hierarchical",
                 r.hierarchical ? distance_json(r.hierarchical->avg_collision_free_distance) : nullptr}};
            if (!r.error.empty()) {
                row["error"] = r.error;
            }
            rows.push_back(std::move(row));
        }
        ordered_json table;
        table["sensing"] = to_string(t.sensing);
        table["tests"] = std::move(rows);
        table["summation"] = {{"failures",
                               {{"dmpc-only", t.sum_failures_dmpc},
                                {"hierarchical", t.sum_failures_hierarchical}}}};
        table["mean"] = {{"failures",
                          {{"dmpc-only", t.mean_failures_dmpc},
                           {"hierarchical", t.mean_failures_hierarchical}}},
                         {"avg_collision_free_distance_m",
                          {{"dmpc-only", distance_json(t.mean_avg_distance_dmpc)},
                           {"hierarchical", distance_json(t.mean_avg_distance_hierarchical)}}}};
        root.push_back(std::move(table));
    }
    return root.dump(2) + "\n";
}

}  // namespace hca
