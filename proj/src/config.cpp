#include "uclab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace uclab {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, 5> kVariantNames{
    "emotion_only_rl", "au_grounded_rl", "zoom_biased_rl", "no_emotion_ema",
    "full_uc_grpo"};
}  // namespace

std::string_view variant_name(Variant v) {
  return kVariantNames[static_cast<std::size_t>(v)];
}

std::optional<Variant> variant_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (kVariantNames[i] == name) return static_cast<Variant>(i);
  }
  return std::nullopt;
}

namespace {

enum class FieldKind { Double, Int, U64 };

struct FieldRef {
  std::string key;
  FieldKind kind;
  void* ptr;
};

std::vector<FieldRef> numeric_fields(ExperimentConfig& cfg) {
  std::vector<FieldRef> out;
  auto d = [&](const std::string& k, double& v) {
    out.push_back({k, FieldKind::Double, &v});
  };
  auto i = [&](const std::string& k, int& v) {
    out.push_back({k, FieldKind::Int, &v});
  };

  i("steps", cfg.steps);

  d("reward.lambda", cfg.reward.lambda);
  d("reward.w_au", cfg.reward.w_au);
  d("reward.r_wrong", cfg.reward.r_wrong);
  d("reward.epsilon", cfg.reward.epsilon);
  d("reward.r_pos", cfg.reward.r_pos);
  d("reward.r_neg", cfg.reward.r_neg);
  d("reward.s_high", cfg.reward.s_high);
  d("reward.h_scale", cfg.reward.h_scale);
  d("reward.h_slope", cfg.reward.h_slope);
  d("reward.kappa_fsm", cfg.reward.kappa_fsm);
  d("reward.r_fsm_min", cfg.reward.r_fsm_min);
  d("reward.r_qual_min", cfg.reward.r_qual_min);
  d("reward.qual_flag_penalty", cfg.reward.qual_flag_penalty);
  i("reward.thought_len_cap", cfg.reward.thought_len_cap);
  d("reward.b_zoom", cfg.reward.b_zoom);

  d("calibration.rho", cfg.calibration.rho);
  i("calibration.activation_min_updates",
    cfg.calibration.activation_min_updates);
  d("calibration.phi_min", cfg.calibration.phi_min);
  d("calibration.phi_max", cfg.calibration.phi_max);
  d("calibration.phi_slope", cfg.calibration.phi_slope);

  d("optimizer.learning_rate", cfg.optimizer.learning_rate);
  d("optimizer.kl_coef", cfg.optimizer.kl_coef);
  d("optimizer.ent_coef", cfg.optimizer.ent_coef);
  i("optimizer.group_size", cfg.optimizer.group_size);
  i("optimizer.turn_budget", cfg.optimizer.turn_budget);
  d("optimizer.std_floor", cfg.optimizer.std_floor);
  i("optimizer.batch_groups", cfg.optimizer.batch_groups);
  i("optimizer.threads", cfg.optimizer.threads);
  d("optimizer.init_zoom_bias", cfg.optimizer.init_zoom_bias);
  d("optimizer.terminal_window_frac", cfg.optimizer.terminal_window_frac);

  d("world.quality_penalty", cfg.world.quality_penalty);
  d("world.detect_floor", cfg.world.detect_floor);
  d("world.detect_slope", cfg.world.detect_slope);
  d("world.au_beta_sharpness", cfg.world.au_beta_sharpness);
  d("world.quality_min", cfg.world.quality_min);
  d("world.quality_max", cfg.world.quality_max);
  d("world.d_fail", cfg.world.d_fail);
  d("world.f1_base", cfg.world.f1_base);
  d("world.f1_correct", cfg.world.f1_correct);
  d("world.f1_zoom", cfg.world.f1_zoom);
  d("world.confusion_weight", cfg.world.confusion_weight);
  d("world.feature_noise", cfg.world.feature_noise);
  out.push_back({"world.seed", FieldKind::U64, &cfg.world.seed});

  for (Emotion em : all_emotions()) {
    const std::string name(emotion_name(em));
    const int idx = static_cast<int>(em);
    d("world.emotion_dist." + name, cfg.world.emotion_dist[idx]);
    d("world.zoom_gain." + name, cfg.world.zoom_gain[idx]);
    d("world.base_acc." + name, cfg.world.base_acc[idx]);
  }
  return out;
}

void set_numeric(const FieldRef& f, const json& value) {
  switch (f.kind) {
    case FieldKind::Double:
      if (!value.is_number()) throw ConfigError(f.key, "expected number");
      *static_cast<double*>(f.ptr) = value.get<double>();
      break;
    case FieldKind::Int:
      if (!value.is_number_integer()) {
        throw ConfigError(f.key, "expected integer");
      }
      *static_cast<int*>(f.ptr) = value.get<int>();
      break;
    case FieldKind::U64:
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw ConfigError(f.key, "expected integer");
      }
      *static_cast<std::uint64_t*>(f.ptr) = value.get<std::uint64_t>();
      break;
  }
}

void validate_config(const ExperimentConfig& cfg) {
  auto require = [](bool ok, const std::string& field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  const RewardParams& r = cfg.reward;
  require(r.lambda > 0.0 && r.lambda < 1.0, "reward.lambda", "must be in (0,1)");
  require(r.w_au >= 0.0 && r.w_au <= 1.0, "reward.w_au", "must be in [0,1]");
  require(r.r_wrong < 0.0, "reward.r_wrong", "must be negative");
  require(r.epsilon > 0.0 && r.epsilon < 1.0, "reward.epsilon",
          "must be in (0,1)");
  require(r.r_pos > 0.0, "reward.r_pos", "must be positive");
  require(r.r_neg < 0.0, "reward.r_neg", "must be negative");
  require(r.s_high > 0.0 && r.s_high <= 1.0, "reward.s_high",
          "must be in (0,1]");
  require(r.r_qual_min <= 0.0, "reward.r_qual_min", "must be <= 0");

  const CalibrationParams& c = cfg.calibration;
  require(c.rho > 0.0 && c.rho <= 1.0, "calibration.rho", "must be in (0,1]");
  require(c.activation_min_updates >= 1, "calibration.activation_min_updates",
          "must be >= 1");
  require(c.phi_min > 0.0 && c.phi_min <= 1.0 && c.phi_max >= 1.0,
          "calibration.phi_min", "bounds must straddle 1");
  require(c.phi_slope > 0.0, "calibration.phi_slope", "must be positive");

  const OptimizerConfig& o = cfg.optimizer;
  require(o.learning_rate > 0.0, "optimizer.learning_rate",
          "must be positive");
  require(o.std_floor > 0.0, "optimizer.std_floor", "must be positive");
  require(o.group_size >= 2, "optimizer.group_size", "must be >= 2");
  require(o.turn_budget >= 2, "optimizer.turn_budget", "must be >= 2");
  require(o.batch_groups >= 1, "optimizer.batch_groups", "must be >= 1");
  require(o.threads >= 1, "optimizer.threads", "must be >= 1");
  require(o.terminal_window_frac > 0.0 && o.terminal_window_frac <= 1.0,
          "optimizer.terminal_window_frac", "must be in (0,1]");

  require(cfg.steps >= 1, "steps", "must be >= 1");
  require(!cfg.seeds.empty(), "seeds", "must not be empty");

  const WorldParams& w = cfg.world;
  double dist_sum = 0.0;
  for (int i = 0; i < kEmotionCount; ++i) {
    const std::string name(emotion_name(static_cast<Emotion>(i)));
    require(w.emotion_dist[i] >= 0.0, "world.emotion_dist." + name,
            "must be >= 0");
    require(w.base_acc[i] >= 0.0 && w.base_acc[i] <= 1.0,
            "world.base_acc." + name, "must be in [0,1]");
    for (int au : w.target_au_sets[i].ids()) {
      bool in_protocol = false;
      for (int p : kProtocolAus) in_protocol |= p == au;
      require(in_protocol, "world.target_au_sets." + name,
              "must be a subset of the 8-AU protocol set");
    }
    dist_sum += w.emotion_dist[i];
  }
  require(std::abs(dist_sum - 1.0) < 1e-9, "world.emotion_dist",
          "must sum to 1");
  require(w.quality_penalty >= 0.0, "world.quality_penalty", "must be >= 0");
  require(w.quality_min >= 0.0 && w.quality_max <= 1.0 &&
              w.quality_min <= w.quality_max,
          "world.quality_min", "quality range must lie within [0,1]");
  require(w.au_beta_sharpness > 0.0, "world.au_beta_sharpness",
          "must be positive");
}

// Explicitly set keys, tracked for variant-conflict detection.
thread_local std::vector<std::string>* g_explicit_keys = nullptr;

void note_explicit(const std::string& key) {
  if (g_explicit_keys) g_explicit_keys->push_back(key);
}

}  // namespace

ResolvedVariant resolve_variant(const ExperimentConfig& cfg) {
  ResolvedVariant rv;
  rv.reward = cfg.reward;
  rv.score.budget = cfg.optimizer.turn_budget;
  switch (cfg.variant) {
    case Variant::EmotionOnlyRl:
      rv.reward.w_au = 0.0;
      rv.score.mode = UtilityMode::FallbackOnly;
      break;
    case Variant::AuGroundedRl:
      rv.score.mode = UtilityMode::FallbackOnly;
      break;
    case Variant::ZoomBiasedRl:
      rv.score.mode = UtilityMode::ConstantBonus;
      break;
    case Variant::NoEmotionEma:
      rv.score.mode = UtilityMode::Calibrated;
      rv.pin_phi = true;
      break;
    case Variant::FullUcGrpo:
      rv.score.mode = UtilityMode::Calibrated;
      break;
  }
  return rv;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<json>", e.what());
  }
  if (!j.is_object()) throw ConfigError("<root>", "expected object");

  ExperimentConfig cfg;
  std::vector<std::string> explicit_keys;
  g_explicit_keys = &explicit_keys;

  auto fields = numeric_fields(cfg);
  auto find_field = [&](const std::string& key) -> const FieldRef* {
    for (const auto& f : fields) {
      if (f.key == key) return &f;
    }
    return nullptr;
  };

  std::function<void(const json&, const std::string&)> walk =
      [&](const json& node, const std::string& prefix) {
        for (auto it = node.begin(); it != node.end(); ++it) {
          const std::string key =
              prefix.empty() ? it.key() : prefix + "." + it.key();
          if (key == "variant") {
            if (!it.value().is_string()) {
              throw ConfigError(key, "expected string");
            }
            auto v = variant_from_name(it.value().get<std::string>());
            if (!v) throw ConfigError(key, "unknown variant");
            cfg.variant = *v;
            note_explicit(key);
          } else if (key == "out_dir") {
            if (!it.value().is_string()) {
              throw ConfigError(key, "expected string");
            }
            cfg.out_dir = it.value().get<std::string>();
          } else if (key == "seeds") {
            if (!it.value().is_array()) {
              throw ConfigError(key, "expected array of integers");
            }
            cfg.seeds.clear();
            for (const auto& s : it.value()) {
              if (!s.is_number_integer() && !s.is_number_unsigned()) {
                throw ConfigError(key, "expected array of integers");
              }
              cfg.seeds.push_back(s.get<std::uint64_t>());
            }
          } else if (key.starts_with("world.target_au_sets.")) {
            const std::string name = key.substr(21);
            auto em = emotion_from_name(name);
            if (!em) throw ConfigError(key, "unknown emotion");
            if (!it.value().is_string()) {
              throw ConfigError(key, "expected AU-set string");
            }
            auto aus = AuSet::parse(it.value().get<std::string>());
            if (!aus) throw ConfigError(key, "malformed AU set");
            cfg.world.target_au_sets[static_cast<int>(*em)] = *aus;
            note_explicit(key);
          } else if (const FieldRef* f = find_field(key)) {
            set_numeric(*f, it.value());
            note_explicit(key);
          } else if (it.value().is_object()) {
            walk(it.value(), key);
          } else {
            throw ConfigError(key, "unknown field");
          }
        }
      };
  walk(j, "");
  g_explicit_keys = nullptr;

  // Variant-implied pins must not be contradicted by explicit values.
  if (cfg.variant == Variant::EmotionOnlyRl) {
    for (const auto& k : explicit_keys) {
      if (k == "reward.w_au" && cfg.reward.w_au != 0.0) {
        throw ConfigError("reward.w_au",
                          "emotion_only_rl pins w_au to 0; remove the override");
      }
    }
  }

  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value) {
  if (dotted_key == "variant") {
    auto v = variant_from_name(value);
    if (!v) throw ConfigError(dotted_key, "unknown variant");
    cfg.variant = *v;
    return;
  }
  if (dotted_key == "out_dir") {
    cfg.out_dir = value;
    return;
  }
  if (dotted_key == "seeds") {
    cfg.seeds.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::uint64_t s = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), s);
      if (ec != std::errc{} || p != tok.data() + tok.size()) {
        throw ConfigError(dotted_key, "expected comma-separated integers");
      }
      cfg.seeds.push_back(s);
    }
    if (cfg.seeds.empty()) throw ConfigError(dotted_key, "must not be empty");
    return;
  }
  if (dotted_key.starts_with("world.target_au_sets.")) {
    const std::string name = dotted_key.substr(21);
    auto em = emotion_from_name(name);
    if (!em) throw ConfigError(dotted_key, "unknown emotion");
    auto aus = AuSet::parse(value);
    if (!aus) throw ConfigError(dotted_key, "malformed AU set");
    cfg.world.target_au_sets[static_cast<int>(*em)] = *aus;
    return;
  }

  auto fields = numeric_fields(cfg);
  for (const auto& f : fields) {
    if (f.key != dotted_key) continue;
    try {
      switch (f.kind) {
        case FieldKind::Double:
          *static_cast<double*>(f.ptr) = std::stod(value);
          break;
        case FieldKind::Int:
          *static_cast<int*>(f.ptr) = std::stoi(value);
          break;
        case FieldKind::U64:
          *static_cast<std::uint64_t*>(f.ptr) = std::stoull(value);
          break;
      }
    } catch (const std::exception&) {
      throw ConfigError(dotted_key, "cannot parse value '" + value + "'");
    }
    if (cfg.variant == Variant::EmotionOnlyRl && dotted_key == "reward.w_au" &&
        cfg.reward.w_au != 0.0) {
      throw ConfigError("reward.w_au",
                        "emotion_only_rl pins w_au to 0; remove the override");
    }
    validate_config(cfg);
    return;
  }
  throw ConfigError(dotted_key, "unknown field");
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["variant"] = std::string(variant_name(cfg.variant));
  j["steps"] = cfg.steps;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;

  auto fields = numeric_fields(const_cast<ExperimentConfig&>(cfg));
  for (const auto& f : fields) {
    if (f.key == "steps") continue;  // already emitted
    json* slot = &j;
    std::string rest = f.key;
    std::size_t dot;
    while ((dot = rest.find('.')) != std::string::npos) {
      slot = &(*slot)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    switch (f.kind) {
      case FieldKind::Double:
        (*slot)[rest] = *static_cast<const double*>(f.ptr);
        break;
      case FieldKind::Int:
        (*slot)[rest] = *static_cast<const int*>(f.ptr);
        break;
      case FieldKind::U64:
        (*slot)[rest] = *static_cast<const std::uint64_t*>(f.ptr);
        break;
    }
  }
  for (Emotion em : all_emotions()) {
    j["world"]["target_au_sets"][std::string(emotion_name(em))] =
        cfg.world.target_au_sets[static_cast<int>(em)].to_string();
  }
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canon = config_to_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace uclab
