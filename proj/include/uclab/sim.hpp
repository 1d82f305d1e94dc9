#pragma once

#include <array>
#include <set>
#include <string>

#include "uclab/policy.hpp"
#include "uclab/rng.hpp"

namespace uclab {

/// Synthetic world: per-emotion accuracy and zoom-utility structure,
/// detection curve, AU-F1 noise. The defaults make local inspection
/// genuinely useful for some emotions, useless for others, and harmful
/// under poor image quality, so the contrastive gap carries real signal.
struct WorldParams {
  std::array<double, kEmotionCount> emotion_dist{};  // sums to 1
  std::array<double, kEmotionCount> zoom_gain{};     // may be negative
  double quality_penalty = 0.5;  // how low quality turns zoom harmful
  double detect_floor = 0.7;     // detection success at quality 0
  double detect_slope = 0.3;     // detection success slope in quality
  std::array<double, kEmotionCount> base_acc{};
  double au_beta_sharpness = 60.0;  // concentration of AU-F1 noise
  std::array<AuSet, kEmotionCount> target_au_sets{};
  std::uint64_t seed = 0;

  double quality_min = 0.4;
  double quality_max = 1.0;
  double d_fail = 0.25;        // accuracy degradation on detection failure
  double f1_base = 0.45;       // AU-F1 mean, wrong emotion, no zoom
  double f1_correct = 0.25;    // mean shift when the emotion is correct
  double f1_zoom = 0.15;       // mean shift when zooming a zoom-positive emotion
  double confusion_weight = 0.6;  // mass on the primary confusable emotion
  double feature_noise = 0.05;    // bounded noise added to features
};

WorldParams default_world();

/// One synthetic query. The observable features are noisy transforms of
/// quality and subtlety only; the latent emotion never leaks into them.
struct SampleSpec {
  std::string query_id;
  Emotion emotion = Emotion::Neutral;
  double quality = 1.0;   // g in [0,1]
  double subtlety = 0.0;  // in [0,1]
  FeatureVec features{};
};

SampleSpec sample_query(const WorldParams& world, RngStream& rng);

/// Primary confusable partner used for wrong-emotion draws.
Emotion confusion_neighbor(Emotion e);

/// Stochastic terminal prediction. Correct-emotion probability is
///   clamp(base_acc[e] + z*(zoom_gain[e] - quality_penalty*(1-g))
///         - d_fail*(1-detected), 0, 1);
/// the AU-F1 draw comes from a Beta distribution whose mean rises with
/// correctness and with zooming on zoom-positive emotions, and the
/// predicted AU set realizes the drawn F1 against the emotion's target
/// set exactly where set arithmetic permits, else as near as achievable.
Prediction outcome(const SampleSpec& sample, bool zoomed,
                   const std::set<Region>& regions, bool detected,
                   const WorldParams& world, RngStream& rng);

/// Nearest-achievable F1 realization: picks counts (kept targets, extra
/// AUs from the protocol complement) whose F1 against `target` is
/// closest to `requested`, then builds that set deterministically.
AuSet realize_f1(double requested, const AuSet& target);

/// Executes one episode: detect-align first, then (on success) the
/// policy's zoom/region decision, then the answer. Generated
/// trajectories always validate clean under the given budget.
Trajectory rollout(const PolicyParams& policy, const SampleSpec& sample,
                   const WorldParams& world, int budget, RngStream& rng);

}  // namespace uclab
