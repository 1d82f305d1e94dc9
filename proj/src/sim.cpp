#include "uclab/sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace uclab {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

constexpr int e(Emotion em) { return static_cast<int>(em); }

// Fixed canonical region layout returned by a successful alignment.
std::map<Region, Box> canonical_boxes() {
  return {
      {Region::ForeheadEyebrow, Box{8, 4, 92, 34}},
      {Region::EyePeriorbital, Box{12, 30, 88, 52}},
      {Region::Nose, Box{34, 48, 66, 72}},
      {Region::MouthChin, Box{22, 70, 78, 96}},
  };
}

}  // namespace

WorldParams default_world() {
  WorldParams w;
  // Sampling is tilted toward the categories where local inspection
  // matters most, mirroring a training split re-balanced toward hard
  // low-resource emotions.
  w.emotion_dist[e(Emotion::Neutral)] = 0.12;
  w.emotion_dist[e(Emotion::Happiness)] = 0.10;
  w.emotion_dist[e(Emotion::Sad)] = 0.10;
  w.emotion_dist[e(Emotion::Surprise)] = 0.08;
  w.emotion_dist[e(Emotion::Fear)] = 0.15;
  w.emotion_dist[e(Emotion::Disgust)] = 0.15;
  w.emotion_dist[e(Emotion::Anger)] = 0.10;
  w.emotion_dist[e(Emotion::Contempt)] = 0.20;

  w.zoom_gain[e(Emotion::Neutral)] = 0.0;
  w.zoom_gain[e(Emotion::Happiness)] = 0.02;
  w.zoom_gain[e(Emotion::Sad)] = -0.10;
  w.zoom_gain[e(Emotion::Surprise)] = 0.02;
  w.zoom_gain[e(Emotion::Fear)] = 0.30;
  w.zoom_gain[e(Emotion::Disgust)] = 0.25;
  w.zoom_gain[e(Emotion::Anger)] = -0.10;
  w.zoom_gain[e(Emotion::Contempt)] = 0.35;

  w.base_acc[e(Emotion::Neutral)] = 0.75;
  w.base_acc[e(Emotion::Happiness)] = 0.80;
  w.base_acc[e(Emotion::Sad)] = 0.65;
  w.base_acc[e(Emotion::Surprise)] = 0.70;
  w.base_acc[e(Emotion::Fear)] = 0.50;
  w.base_acc[e(Emotion::Disgust)] = 0.55;
  w.base_acc[e(Emotion::Anger)] = 0.62;
  w.base_acc[e(Emotion::Contempt)] = 0.45;

  w.target_au_sets[e(Emotion::Neutral)] = AuSet{};
  w.target_au_sets[e(Emotion::Happiness)] = AuSet::from_ids({6, 12});
  w.target_au_sets[e(Emotion::Sad)] = AuSet::from_ids({1, 4});
  w.target_au_sets[e(Emotion::Surprise)] = AuSet::from_ids({1, 2, 25, 26});
  w.target_au_sets[e(Emotion::Fear)] = AuSet::from_ids({1, 2, 4, 25, 26});
  w.target_au_sets[e(Emotion::Disgust)] = AuSet::from_ids({9, 25, 26});
  w.target_au_sets[e(Emotion::Anger)] = AuSet::from_ids({4, 25});
  w.target_au_sets[e(Emotion::Contempt)] = AuSet::from_ids({12});

  w.seed = 0xA11CEull;
  return w;
}

SampleSpec sample_query(const WorldParams& world, RngStream& rng) {
  SampleSpec s;
  s.emotion = static_cast<Emotion>(rng.categorical(world.emotion_dist));
  s.quality = rng.uniform(world.quality_min, world.quality_max);
  s.subtlety = rng.uniform(0.0, 1.0);
  const double n = world.feature_noise;
  s.features[0] = s.quality + rng.uniform(-n, n);
  s.features[1] = s.subtlety + rng.uniform(-n, n);
  s.features[2] = s.quality * s.subtlety + rng.uniform(-n, n);
  s.features[3] = rng.uniform(-n, n);
  return s;
}

Emotion confusion_neighbor(Emotion em) {
  switch (em) {
    case Emotion::Neutral: return Emotion::Sad;
    case Emotion::Happiness: return Emotion::Contempt;
    case Emotion::Sad: return Emotion::Neutral;
    case Emotion::Surprise: return Emotion::Fear;
    case Emotion::Fear: return Emotion::Surprise;
    case Emotion::Disgust: return Emotion::Anger;
    case Emotion::Anger: return Emotion::Disgust;
    case Emotion::Contempt: return Emotion::Happiness;
  }
  return Emotion::Neutral;
}

AuSet realize_f1(double requested, const AuSet& target) {
  const int t = static_cast<int>(target.size());
  std::vector<int> complement;
  for (int au : kProtocolAus) {
    if (!target.contains(au)) complement.push_back(au);
  }
  const int max_extra = static_cast<int>(complement.size());

  int best_i = 0, best_w = 0;
  double best_err = 2.0;
  for (int i = 0; i <= t; ++i) {
    for (int w = 0; w <= max_extra; ++w) {
      double f1;
      if (i + w + t == 0) {
        f1 = 1.0;  // both sets empty
      } else {
        f1 = 2.0 * i / static_cast<double>(i + w + t);
      }
      const double err = std::abs(f1 - requested);
      // Tie-break: prefer more kept targets, then fewer extras.
      if (err < best_err - 1e-15 ||
          (std::abs(err - best_err) <= 1e-15 &&
           (i > best_i || (i == best_i && w < best_w)))) {
        best_err = err;
        best_i = i;
        best_w = w;
      }
    }
  }

  std::vector<int> ids;
  ids.insert(ids.end(), target.ids().begin(), target.ids().begin() + best_i);
  ids.insert(ids.end(), complement.begin(), complement.begin() + best_w);
  return AuSet::from_ids(ids);
}

Prediction outcome(const SampleSpec& sample, bool zoomed,
                   const std::set<Region>& /*regions*/, bool detected,
                   const WorldParams& world, RngStream& rng) {
  const int idx = e(sample.emotion);
  const double z = zoomed ? 1.0 : 0.0;
  const double p = clamp01(
      world.base_acc[idx] +
      z * (world.zoom_gain[idx] -
           world.quality_penalty * (1.0 - sample.quality)) -
      world.d_fail * (detected ? 0.0 : 1.0));
  const bool correct = rng.bernoulli(p);

  Prediction pred;
  if (correct) {
    pred.emotion = sample.emotion;
  } else {
    const Emotion neighbor = confusion_neighbor(sample.emotion);
    if (rng.bernoulli(world.confusion_weight)) {
      pred.emotion = neighbor;
    } else {
      std::vector<Emotion> others;
      for (Emotion other : all_emotions()) {
        if (other != sample.emotion && other != neighbor) {
          others.push_back(other);
        }
      }
      pred.emotion = others[static_cast<std::size_t>(
          rng.uniform() * static_cast<double>(others.size()))];
    }
  }

  double mean = world.f1_base;
  if (correct) mean += world.f1_correct;
  if (zoomed && world.zoom_gain[idx] > 0.0) mean += world.f1_zoom;
  mean = std::min(0.98, std::max(0.02, mean));
  const double kappa = world.au_beta_sharpness;
  const double draw = rng.beta(mean * kappa, (1.0 - mean) * kappa);
  pred.aus = realize_f1(draw, world.target_au_sets[idx]);
  return pred;
}

Trajectory rollout(const PolicyParams& policy, const SampleSpec& sample,
                   const WorldParams& world, int budget, RngStream& rng) {
  assert(budget >= 2);
  std::vector<TrajectoryEvent> events;

  const double p_det =
      clamp01(world.detect_floor + world.detect_slope * sample.quality);
  const bool detected = rng.bernoulli(p_det);

  TrajectoryEvent detect;
  detect.step = 1;
  detect.action.type = ActionType::DetectAlign;
  if (detected) {
    detect.observation.type = ObsType::AlignedFace;
    detect.observation.boxes = canonical_boxes();
  } else {
    detect.observation.type = ObsType::DetectionFailed;
  }
  events.push_back(std::move(detect));

  bool zoomed = false;
  std::set<Region> regions;
  if (detected && budget >= 3) {
    const Decision d = policy_decision(policy, sample.features, rng);
    if (d.zoom) {
      zoomed = true;
      regions = d.regions;
      TrajectoryEvent zoom;
      zoom.step = 2;
      zoom.action.type = ActionType::ZoomIn;
      zoom.action.regions = regions;
      zoom.observation.type = ObsType::RoiCrops;
      zoom.observation.regions = regions;
      events.push_back(std::move(zoom));
    }
  }

  TrajectoryEvent answer;
  answer.step = static_cast<int>(events.size()) + 1;
  answer.action.type = ActionType::Answer;
  answer.action.prediction =
      outcome(sample, zoomed, regions, detected, world, rng);
  answer.observation.type = ObsType::None;
  events.push_back(std::move(answer));

  return make_trajectory(std::move(events));
}

}  // namespace uclab
