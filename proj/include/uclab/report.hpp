#pragma once

#include <string>
#include <vector>

#include "uclab/trainer.hpp"

namespace uclab {

struct SeedSummary {
  std::uint64_t seed = 0;
  double accuracy = 0;
  double zoom_ratio = 0;
  double mean_reward = 0;
};

/// Aggregate over the seeds of one run directory.
struct RunReport {
  std::string variant;
  std::string config_hash;
  std::vector<SeedSummary> per_seed;
  double accuracy_mean = 0, accuracy_std = 0;
  double zoom_ratio_mean = 0, zoom_ratio_std = 0;
  double mean_reward_mean = 0, mean_reward_std = 0;
  EmotionBreakdown emotions;  // pooled over seeds
};

RunReport build_report(const std::vector<RunArtifact>& artifacts,
                       const ExperimentConfig& cfg);

std::string report_to_json(const RunReport& report);

/// Reads the metrics/terminal CSVs under run_dir and writes report.json
/// plus the plot-data tables (accuracy_vs_step.csv, zoom_ratio_vs_step.csv,
/// per_emotion_bars.csv). Returns false when the directory holds no runs
/// or a file is corrupt; `error` then names the problem.
bool write_report_from_dir(const std::string& run_dir, std::string* error);

}  // namespace uclab
