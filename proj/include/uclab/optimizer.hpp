#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "uclab/policy.hpp"
#include "uclab/reward.hpp"

namespace uclab {

struct OptimizerConfig {
  double learning_rate = 0.2;
  double kl_coef = 0.1;
  double ent_coef = 0.01;
  int group_size = 5;    // G rollouts per query
  int turn_budget = 4;   // interaction budget T
  double std_floor = 1e-6;
  int batch_groups = 32;  // query groups per optimization step
  int threads = 1;        // rollout workers; results are order-independent
  double init_zoom_bias = -3.0;
  double terminal_window_frac = 0.25;  // share of final steps averaged
                                       // into terminal metrics
};

/// Group-relative advantages: (R_i - mean) / max(population std, floor).
/// All-equal rewards yield all zeros.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor);

/// A scored rollout group plus the feature point its decisions were
/// sampled at (all G rollouts of a query share the sample's features).
struct ScoredGroup {
  RolloutGroup group;  // rewards populated
  FeatureVec features{};
};

struct StepMetrics {
  double mean_reward = 0;
  double mean_r_acc = 0;
  double accuracy = 0;
  double zoom_ratio = 0;
  double mean_abs_advantage = 0;
  double kl = 0;
  double entropy = 0;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value of the step surrogate
///   (1/(B*G)) sum_i Adv_i*logprob_i - kl_coef*mean_q KL_q + ent_coef*mean_q H_q
/// with KL and entropy evaluated in closed form over the compound
/// decision space at each query's feature point. Trajectories without a
/// policy decision (detection failures) contribute no gradient term.
double surrogate_value(const PolicyParams& params,
                       std::span<const ScoredGroup> groups,
                       const PolicyParams& ref, const OptimizerConfig& cfg);

std::array<double, PolicyParams::kFlatDim> surrogate_gradient(
    const PolicyParams& params, std::span<const ScoredGroup> groups,
    const PolicyParams& ref, const OptimizerConfig& cfg);

/// One gradient-ascent step on the surrogate. Throws NonFiniteGradient
/// if any gradient component is not finite.
PolicyParams update_step(const PolicyParams& params,
                         std::span<const ScoredGroup> groups,
                         const PolicyParams& ref, const OptimizerConfig& cfg,
                         StepMetrics* metrics = nullptr);

}  // namespace uclab
