#pragma once

#include <array>
#include <string>
#include <vector>

#include "uclab/config.hpp"

namespace uclab {

struct MetricsRow {
  long step = 0;
  double mean_reward = 0;
  double mean_r_acc = 0;
  double accuracy = 0;
  double zoom_ratio = 0;
  double kl = 0;
  double entropy = 0;
  std::array<double, kEmotionCount> delta_bar{};  // post-update state
};

/// Modulation factors actually consumed while scoring step `step`,
/// together with the pre-update state they were derived from.
struct PhiTraceRow {
  long step = 0;
  int emotion = 0;
  int count_prev = 0;
  double delta_bar_prev = 0;
  double phi_lazy = 1;
  double phi_unnec = 1;
};

struct EmotionBreakdown {
  std::array<double, kEmotionCount> zoom_ratio{};
  std::array<double, kEmotionCount> accuracy{};
  std::array<long, kEmotionCount> samples{};
};

struct RunArtifact {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> metrics;
  std::vector<PhiTraceRow> phi_trace;
  std::vector<CalibratorView> snapshots;  // pre-update view per step
  PolicyParams initial_policy;
  PolicyParams final_policy;
  EmaCalibrator final_calibrator;
  // Terminal metrics average the final terminal_window_frac of steps.
  double terminal_accuracy = 0;
  double terminal_zoom_ratio = 0;
  double terminal_mean_reward = 0;
  EmotionBreakdown terminal_emotions;
};

/// One full training run. Per step: sample a batch of query groups and
/// roll out G trajectories each; validate and score against the current
/// calibrator snapshot; normalize advantages and update the policy; then
/// update the calibrator with the step's valid utility gaps. The
/// reference policy is the initialization. All randomness derives from
/// (world seed, run seed, step, query, rollout), so serial and parallel
/// execution produce identical artifacts.
RunArtifact run_training(const ExperimentConfig& cfg, std::uint64_t seed);

/// Writes metrics_seed<S>.csv, phi_trace_seed<S>.csv and the final
/// policy/calibrator checkpoints into out_dir.
void write_run_artifact(const RunArtifact& artifact,
                        const ExperimentConfig& cfg,
                        const std::string& out_dir);

/// Formats a double with round-trip precision (%.17g), used by every
/// CSV writer so reruns are byte-identical.
std::string format_double(double v);

}  // namespace uclab
