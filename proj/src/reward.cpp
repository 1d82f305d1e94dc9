#include "uclab/reward.hpp"

#include <algorithm>
#include <cmath>

namespace uclab {

std::string_view util_branch_name(UtilBranch b) {
  switch (b) {
    case UtilBranch::AdaptiveConsistent: return "adaptive_consistent";
    case UtilBranch::AdaptiveLazyPenalty: return "adaptive_lazy_penalty";
    case UtilBranch::AdaptiveUnnecPenalty: return "adaptive_unnec_penalty";
    case UtilBranch::AdaptiveNeutral: return "adaptive_neutral";
    case UtilBranch::FallbackHigh: return "fallback_high";
    case UtilBranch::FallbackLow: return "fallback_low";
    case UtilBranch::ZoomBonus: return "zoom_bonus";
  }
  return "?";
}

double task_reward(const std::optional<Prediction>& pred,
                   const TaskLabels& labels, const RewardParams& params) {
  const bool correct = pred.has_value() && pred->emotion == labels.emotion;
  const double f1 = au_set_f1(pred ? pred->aus : AuSet{}, labels.aus);
  if (correct) return params.w_y() + params.w_au * f1;
  return params.r_wrong + 0.5 * params.w_au * f1;
}

GroupUtility group_utility(const RolloutGroup& group,
                           const RewardParams& params) {
  GroupUtility util;
  double sum_plus = 0.0, sum_minus = 0.0;
  for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
    const Trajectory& t = group.trajectories[i];
    if (!t.detection_ok) {
      util.excluded.push_back(i);
      continue;
    }
    const double r_acc = task_reward(t.prediction, group.labels, params);
    if (t.zoom_used) {
      util.z_plus.push_back(i);
      sum_plus += r_acc;
    } else {
      util.z_minus.push_back(i);
      sum_minus += r_acc;
    }
  }
  if (!util.z_plus.empty() && !util.z_minus.empty()) {
    util.delta = sum_plus / static_cast<double>(util.z_plus.size()) -
                 sum_minus / static_cast<double>(util.z_minus.size());
  }
  return util;
}

double penalty_magnitude(double abs_delta, const RewardParams& params) {
  return params.h_scale * std::tanh(params.h_slope * abs_delta);
}

std::pair<double, UtilBranch> adaptive_utility_reward(
    bool zoomed, double delta, double phi_lazy, double phi_unnec,
    const RewardParams& params) {
  if (std::abs(delta) < params.epsilon) {
    return {params.r_pos, UtilBranch::AdaptiveNeutral};
  }
  if (delta >= params.epsilon) {
    if (zoomed) return {params.r_pos, UtilBranch::AdaptiveConsistent};
    return {-penalty_magnitude(std::abs(delta), params) * phi_lazy,
            UtilBranch::AdaptiveLazyPenalty};
  }
  // delta <= -epsilon
  if (!zoomed) return {params.r_pos, UtilBranch::AdaptiveConsistent};
  return {-penalty_magnitude(std::abs(delta), params) * phi_unnec,
          UtilBranch::AdaptiveUnnecPenalty};
}

std::pair<double, UtilBranch> fallback_utility_reward(
    const Trajectory& traj, const TaskLabels& labels,
    const RewardParams& params) {
  const bool correct =
      traj.prediction && traj.prediction->emotion == labels.emotion;
  const AuSet aus = traj.prediction ? traj.prediction->aus : AuSet{};
  const double s = std::max(correct ? 1.0 : 0.0, au_set_f1(aus, labels.aus));
  if (s >= params.s_high) return {params.r_pos, UtilBranch::FallbackHigh};
  return {params.r_neg, UtilBranch::FallbackLow};
}

std::pair<double, UtilBranch> utility_reward(
    const Trajectory& traj, std::size_t index, const GroupUtility& util,
    std::pair<double, double> phi, const TaskLabels& labels,
    const RewardParams& params) {
  const bool excluded =
      std::find(util.excluded.begin(), util.excluded.end(), index) !=
      util.excluded.end();
  if (util.delta && !excluded) {
    return adaptive_utility_reward(traj.zoom_used, *util.delta, phi.first,
                                   phi.second, params);
  }
  return fallback_utility_reward(traj, labels, params);
}

double quality_reward(const Trajectory& traj, const FsmVerdict& /*verdict*/,
                      const RewardParams& params) {
  int flags = 0;
  int answers = 0;
  bool oversized = false;
  for (const auto& ev : traj.events) {
    if (ev.action.type == ActionType::Answer) ++answers;
    if (static_cast<int>(ev.thought.size()) > params.thought_len_cap) {
      oversized = true;
    }
  }
  if (answers > 1) ++flags;
  if (traj.prediction && traj.prediction->aus.empty()) ++flags;
  if (oversized) ++flags;
  return std::max(params.r_qual_min, -params.qual_flag_penalty * flags);
}

std::vector<RewardBreakdown> score_group(const RolloutGroup& group,
                                         std::pair<double, double> phi,
                                         const RewardParams& params,
                                         const ScoreOptions& options) {
  const std::size_t n = group.trajectories.size();
  std::vector<RewardBreakdown> out(n);

  // Pass 1: per-trajectory terms.
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory& t = group.trajectories[i];
    RewardBreakdown& b = out[i];
    b.r_acc = task_reward(t.prediction, group.labels, params);
    const FsmVerdict verdict =
        validate(t, options.budget, params.kappa_fsm, params.r_fsm_min);
    b.r_fsm = verdict.r_fsm;
    b.r_qual = quality_reward(t, verdict, params);
  }

  // Pass 2: group-level utility injection and totals.
  GroupUtility util;
  if (options.mode == UtilityMode::Calibrated) {
    util = group_utility(group, params);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory& t = group.trajectories[i];
    RewardBreakdown& b = out[i];
    switch (options.mode) {
      case UtilityMode::Calibrated: {
        auto [value, branch] =
            utility_reward(t, i, util, phi, group.labels, params);
        b.r_util = value;
        b.util_branch = branch;
        if (branch == UtilBranch::AdaptiveConsistent ||
            branch == UtilBranch::AdaptiveLazyPenalty ||
            branch == UtilBranch::AdaptiveUnnecPenalty ||
            branch == UtilBranch::AdaptiveNeutral) {
          b.delta_used = util.delta;
        }
        break;
      }
      case UtilityMode::FallbackOnly: {
        auto [value, branch] = fallback_utility_reward(t, group.labels, params);
        b.r_util = value;
        b.util_branch = branch;
        break;
      }
      case UtilityMode::ConstantBonus:
        b.r_util = t.zoom_used ? params.b_zoom : 0.0;
        b.util_branch = UtilBranch::ZoomBonus;
        break;
    }
    b.r_tool = b.r_fsm + b.r_util;
    b.total = params.lambda * b.r_acc + (1.0 - params.lambda) * b.r_tool +
              b.r_qual;
  }
  return out;
}

}  // namespace uclab
