#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "uclab/calibration.hpp"
#include "uclab/optimizer.hpp"
#include "uclab/reward.hpp"
#include "uclab/sim.hpp"

namespace uclab {

/// Ablation variants mirroring the reward-wiring columns of the study.
enum class Variant {
  EmotionOnlyRl = 0,  // w_au = 0, fallback-only utility
  AuGroundedRl,       // dense reward on, fallback-only utility
  ZoomBiasedRl,       // utility replaced by a constant zoom bonus
  NoEmotionEma,       // contrastive on, factors pinned to (1,1)
  FullUcGrpo,         // everything on
};

std::string_view variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config error at '" + field + "': " + what),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  Variant variant = Variant::FullUcGrpo;
  int steps = 160;
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = "runs/default";
  RewardParams reward;
  CalibrationParams calibration;
  OptimizerConfig optimizer;
  WorldParams world = default_world();
};

/// Reward wiring implied by the variant. Conflicting explicit overrides
/// are rejected at load time.
struct ResolvedVariant {
  RewardParams reward;      // w_au forced to 0 for emotion-only
  ScoreOptions score;       // utility mode and budget
  bool pin_phi = false;     // factors forced to (1,1)
};

ResolvedVariant resolve_variant(const ExperimentConfig& cfg);

/// Loads a JSON config file; all fields optional, defaults apply.
/// Unknown keys are rejected with ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

/// Applies `--dotted.path value` overrides (e.g. "reward.lambda" "0.6").
void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value);

/// Canonical JSON of the fully resolved config (sorted keys).
std::string config_to_json(const ExperimentConfig& cfg);

/// FNV-1a digest of the canonical JSON; stable across key reordering of
/// the input file.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace uclab
