#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hca/engine.hpp"

namespace hca {

/// One test row: both strategies on the same seed.
struct CompareRow {
    std::uint64_t seed{0};
    std::optional<Metrics> dmpc_only;
    std::optional<Metrics> hierarchical;
    std::string error;  // non-empty when a run of this seed failed
};

/// Rows for one sensing mode plus the summation and mean rows.
struct CompareTable {
    SensingMode sensing{SensingMode::deterministic};
    std::vector<CompareRow> rows;
    std::int64_t sum_failures_dmpc{0};
    std::int64_t sum_failures_hierarchical{0};
    double mean_failures_dmpc{0.0};
    double mean_failures_hierarchical{0.0};
    double mean_avg_distance_dmpc{0.0};          // 2 decimals, +inf if any row is inf
    double mean_avg_distance_hierarchical{0.0};
};

/// Recomputes the summation and mean rows from the completed test rows.
void summarize(CompareTable& table);

/// Runs both strategies for every seed under both sensing modes. A failing seed
/// is recorded in its row and the remaining seeds still run. `jobs` > 1 runs
/// independent combinations concurrently.
std::vector<CompareTable> compare(const Scenario& base, std::span<const std::uint64_t> seeds,
                                  int jobs = 1);

std::string summary_csv(std::span<const CompareTable> tables);
std::string summary_json(std::span<const CompareTable> tables);

}  // namespace hca
