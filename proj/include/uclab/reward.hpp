#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "uclab/fsm.hpp"

namespace uclab {

/// All reward constants. Defaults keep penalties within [-1, 0] and the
/// task reward within [r_wrong, 1]; everything is overridable via config.
struct RewardParams {
  double lambda = 0.7;    // task-vs-tool mixing weight, in (0,1)
  double w_au = 0.5;      // AU share of the task reward; w_y = 1 - w_au
  double r_wrong = -0.5;  // base penalty for a wrong emotion
  double epsilon = 0.05;  // neutral interval half-width for the utility gap
  double r_pos = 0.3;     // reward for utility-consistent decisions
  double r_neg = -0.3;    // fallback penalty below the performance gate
  double s_high = 0.8;    // fallback performance gate, in (0,1]
  double h_scale = 1.0;   // penalty curve bound
  double h_slope = 2.0;   // penalty curve steepness
  double kappa_fsm = 0.2;      // per-violation structural penalty
  double r_fsm_min = -1.0;     // structural penalty floor
  double r_qual_min = -0.3;    // quality penalty floor
  double qual_flag_penalty = 0.15;  // per quality flag
  int thought_len_cap = 2000;       // quality flag above this many bytes
  double b_zoom = 0.3;  // constant bonus of the zoom-biased variant

  double w_y() const { return 1.0 - w_au; }
};

enum class UtilBranch {
  AdaptiveConsistent = 0,
  AdaptiveLazyPenalty,
  AdaptiveUnnecPenalty,
  AdaptiveNeutral,
  FallbackHigh,
  FallbackLow,
  ZoomBonus,  // zoom-biased variant only: utility replaced by a flat bonus
};

std::string_view util_branch_name(UtilBranch b);

/// Per-trajectory reward record. Always satisfies
///   r_tool = r_fsm + r_util and total = lambda*r_acc + (1-lambda)*r_tool + r_qual.
struct RewardBreakdown {
  double r_acc = 0;
  double r_fsm = 0;
  double r_util = 0;
  double r_tool = 0;
  double r_qual = 0;
  double total = 0;
  UtilBranch util_branch = UtilBranch::FallbackLow;
  std::optional<double> delta_used;  // gap seen by adaptive branches
};

/// Within-group zoom/no-zoom partition over detection-successful
/// trajectories, and the contrastive utility gap when both sides exist.
struct GroupUtility {
  std::vector<std::size_t> z_plus;    // zoomed, detection ok
  std::vector<std::size_t> z_minus;   // not zoomed, detection ok
  std::vector<std::size_t> excluded;  // detection failures
  std::optional<double> delta;        // mean r_acc gap, zoomed minus not
};

/// G rollouts for one query plus the query's ground truth. The unit of
/// contrastive utility estimation and advantage normalization.
struct RolloutGroup {
  std::string query_id;
  TaskLabels labels;
  std::vector<Trajectory> trajectories;
  std::optional<std::vector<RewardBreakdown>> rewards;
};

/// Dense task reward. Correct emotion: w_y + w_au*F1. Wrong emotion:
/// r_wrong + 0.5*w_au*F1 (half the AU term is retained). A missing
/// prediction counts as a wrong emotion with an empty AU set.
double task_reward(const std::optional<Prediction>& pred,
                   const TaskLabels& labels, const RewardParams& params);

/// Contrastive utility gap over the group's detection-successful
/// trajectories; delta absent when either side is empty.
GroupUtility group_utility(const RolloutGroup& group,
                           const RewardParams& params);

/// Penalty magnitude h(d) = h_scale * tanh(h_slope * d).
double penalty_magnitude(double abs_delta, const RewardParams& params);

/// Adaptive utility reward given the gap and the calibration factors.
std::pair<double, UtilBranch> adaptive_utility_reward(
    bool zoomed, double delta, double phi_lazy, double phi_unnec,
    const RewardParams& params);

/// Performance-gated fallback: r_pos when
/// max(correct-emotion indicator, AU F1) >= s_high, else r_neg.
/// Independent of the zoom decision.
std::pair<double, UtilBranch> fallback_utility_reward(
    const Trajectory& traj, const TaskLabels& labels,
    const RewardParams& params);

/// Utility cascade: adaptive when the gap is defined and the trajectory
/// is not excluded; fallback otherwise.
std::pair<double, UtilBranch> utility_reward(
    const Trajectory& traj, std::size_t index, const GroupUtility& util,
    std::pair<double, double> phi, const TaskLabels& labels,
    const RewardParams& params);

/// Bounded output-quality regularizer in [r_qual_min, 0]. Flags:
/// more than one Answer event, a prediction with an empty AU set, any
/// thought text beyond the length cap.
double quality_reward(const Trajectory& traj, const FsmVerdict& verdict,
                      const RewardParams& params);

/// How the utility slot of R_tool is wired (set by the experiment variant).
enum class UtilityMode {
  Calibrated,    // contrastive cascade with fallback
  FallbackOnly,  // contrastive disabled, fallback everywhere
  ConstantBonus, // b_zoom per zoomed trajectory, nothing else
};

struct ScoreOptions {
  UtilityMode mode = UtilityMode::Calibrated;
  int budget = 4;
};

/// Two-pass group scoring. Pass 1 computes per-trajectory terms
/// (r_acc, r_fsm, r_qual, zoom/detect metadata); pass 2 estimates the
/// group gap and injects the utility term. `phi` must come from the
/// pre-update calibrator snapshot for the group's label emotion.
std::vector<RewardBreakdown> score_group(
    const RolloutGroup& group, std::pair<double, double> phi,
    const RewardParams& params, const ScoreOptions& options);

}  // namespace uclab
