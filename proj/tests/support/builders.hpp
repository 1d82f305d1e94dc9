#pragma once

// Shared trajectory/group builders for tests.

#include <optional>
#include <set>
#include <vector>

#include "uclab/reward.hpp"
#include "uclab/rng.hpp"

namespace uclab::testing {

inline TrajectoryEvent detect_event(int step, bool ok) {
  TrajectoryEvent ev;
  ev.step = step;
  ev.action.type = ActionType::DetectAlign;
  if (ok) {
    ev.observation.type = ObsType::AlignedFace;
    for (Region r : all_regions()) ev.observation.boxes[r] = Box{0, 0, 1, 1};
  } else {
    ev.observation.type = ObsType::DetectionFailed;
  }
  return ev;
}

inline TrajectoryEvent zoom_event(int step, std::set<Region> regions) {
  TrajectoryEvent ev;
  ev.step = step;
  ev.action.type = ActionType::ZoomIn;
  ev.action.regions = regions;
  ev.observation.type = ObsType::RoiCrops;
  ev.observation.regions = std::move(regions);
  return ev;
}

inline TrajectoryEvent answer_event(int step, Prediction pred) {
  TrajectoryEvent ev;
  ev.step = step;
  ev.action.type = ActionType::Answer;
  ev.action.prediction = std::move(pred);
  ev.observation.type = ObsType::None;
  return ev;
}

/// detect -> optional zoom -> optional answer, well-formed.
inline Trajectory make_traj(bool detected, bool zoomed,
                            std::optional<Prediction> pred,
                            std::set<Region> regions = {Region::Nose}) {
  std::vector<TrajectoryEvent> events;
  int step = 1;
  events.push_back(detect_event(step++, detected));
  if (zoomed) events.push_back(zoom_event(step++, std::move(regions)));
  if (pred) events.push_back(answer_event(step++, std::move(*pred)));
  return make_trajectory(std::move(events));
}

/// Randomized rollout group exercising zoom/detect/prediction structure,
/// including illegal shapes (zoom after failed detect, budget overruns,
/// repeated zooms, missing answers).
inline RolloutGroup random_group(RngStream& rng, int group_size = 5) {
  RolloutGroup group;
  group.labels.emotion =
      static_cast<Emotion>(rng.next_u64() % kEmotionCount);
  {
    std::vector<int> target;
    for (int au : kProtocolAus) {
      if (rng.bernoulli(0.5)) target.push_back(au);
    }
    group.labels.aus = AuSet::from_ids(target);
  }
  for (int i = 0; i < group_size; ++i) {
    const bool detected = rng.bernoulli(0.8);
    const bool zoomed = rng.bernoulli(0.5);
    std::optional<Prediction> pred;
    if (!rng.bernoulli(0.1)) {
      Prediction p;
      p.emotion = static_cast<Emotion>(rng.next_u64() % kEmotionCount);
      std::vector<int> aus;
      for (int au : kProtocolAus) {
        if (rng.bernoulli(0.4)) aus.push_back(au);
      }
      if (rng.bernoulli(0.1)) aus.push_back(15);  // outside the protocol set
      p.aus = AuSet::from_ids(aus);
      pred = std::move(p);
    }
    std::set<Region> regions;
    regions.insert(static_cast<Region>(rng.next_u64() % kRegionCount));
    if (rng.bernoulli(0.3)) {
      regions.insert(static_cast<Region>(rng.next_u64() % kRegionCount));
    }
    Trajectory traj = make_traj(detected, zoomed, std::move(pred), regions);
    if (rng.bernoulli(0.15)) {
      // Tack on an extra zoom, sometimes repeating a region, sometimes
      // blowing the budget or trailing the answer.
      std::vector<TrajectoryEvent> events = traj.events;
      std::set<Region> extra{
          static_cast<Region>(rng.next_u64() % kRegionCount)};
      events.push_back(
          zoom_event(static_cast<int>(events.size()) + 1, extra));
      traj = make_trajectory(std::move(events));
    }
    group.trajectories.push_back(std::move(traj));
  }
  return group;
}

}  // namespace uclab::testing
