#pragma once

#include <optional>

#include "boxdistill/config.hpp"
#include "boxdistill/metrics.hpp"
#include "boxdistill/pipeline.hpp"

namespace boxdistill {

struct StageOutcome {
  StageReport report;
  MetricReport target_metrics;
  bool resumed = false;  // loaded from an existing checkpoint
};

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::optional<StageOutcome> source, stage1, stage2;
  std::optional<MetricReport> source_on_source;  // stage-0 source-test check
};

/// Materializes the configured datasets (synthetic generation is in-memory
/// and deterministic; directory kind loads from disk).
std::pair<DomainSplits, DomainSplits> prepare_data(const ExperimentConfig& c);

/// Runs the enabled stages in order, resuming any stage whose checkpoint
/// already exists in the output directory. Writes manifest, per-stage
/// reports, checkpoints, the pseudo-label cache, and metric summaries.
/// Config validation failures are all reported before any compute starts.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes manifest.json (config, config hash, resolved seeds, version).
void write_manifest(const ExperimentConfig& resolved,
                    const std::filesystem::path& output_dir,
                    const std::string& command);

// Canonical artifact locations inside an output directory.
std::filesystem::path checkpoint_path(const std::filesystem::path& out,
                                      const std::string& stage, bool best);
std::filesystem::path cache_path(const std::filesystem::path& out);
std::filesystem::path stage_report_path(const std::filesystem::path& out,
                                        const std::string& stage);
std::filesystem::path metrics_summary_path(const std::filesystem::path& out,
                                           bool table);

}  // namespace boxdistill
