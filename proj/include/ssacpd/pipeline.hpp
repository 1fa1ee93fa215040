#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "ssacpd/io.hpp"

namespace ssacpd {

// Multi-stage experiment runner behind the `experiment` subcommand. Three
// config kinds are supported:
//   "roc"   - synthetic AUC experiments over a parameter grid and conditions
//   "order" - order-selection study over a grid of true stationary dimensions
//   "pump"  - fixed-dataset parameter-choice run: selection table, BNISE
//             table, per-d_s segmentations and (given truth) an AUC table
// Every stage caches its outputs under <out>/cache; existing files are reused
// on rerun, so deleting only the final outputs recomputes only the
// aggregation.
struct PipelineOutcome {
    std::vector<std::filesystem::path> written;
    int stages_skipped = 0;
};

PipelineOutcome run_pipeline(const json& config, const std::filesystem::path& out_dir,
                             std::optional<std::uint64_t> seed_override, int jobs);

// Helpers shared with the CLI.
SsaConfig ssa_config_from_json(const json& j);
ExperimentPlan experiment_plan_from_json(const json& config);

} // namespace ssacpd
