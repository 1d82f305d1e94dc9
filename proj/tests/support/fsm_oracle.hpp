#pragma once

// Declarative legality oracle: an independent transcription of the
// violation semantics as whole-sequence scans, deliberately structured
// nothing like the incremental state machine it checks.

#include <algorithm>
#include <vector>

#include "uclab/fsm.hpp"

namespace uclab::testing {

inline std::vector<Violation> oracle_violations(const Trajectory& traj,
                                                int budget) {
  std::vector<Violation> out;
  const auto& evs = traj.events;
  const int n = static_cast<int>(evs.size());

  if (n > budget) out.push_back(Violation::BudgetExceeded);

  int first_answer = -1;
  for (int i = 0; i < n; ++i) {
    if (evs[i].action.type == ActionType::Answer && first_answer < 0) {
      first_answer = i;
    }
  }
  if (first_answer < 0) out.push_back(Violation::MissingAnswer);

  for (int i = 0; i < n; ++i) {
    if (first_answer >= 0 && i > first_answer) {
      out.push_back(Violation::AnswerNotLast);
    }
    if (evs[i].action.type == ActionType::DetectAlign) {
      for (int j = 0; j < i; ++j) {
        if (evs[j].action.type == ActionType::DetectAlign) {
          out.push_back(Violation::RepeatedDetect);
          break;
        }
      }
    }
    if (evs[i].action.type == ActionType::ZoomIn) {
      int last_detect = -1;
      for (int j = 0; j < i; ++j) {
        if (evs[j].action.type == ActionType::DetectAlign) last_detect = j;
      }
      if (last_detect < 0) {
        out.push_back(Violation::ZoomBeforeDetect);
      } else if (evs[last_detect].observation.type != ObsType::AlignedFace) {
        out.push_back(Violation::ZoomAfterFailedDetect);
      }
      for (Region r : evs[i].action.regions) {
        bool seen_before = false;
        for (int j = 0; j < i && !seen_before; ++j) {
          if (evs[j].action.type == ActionType::ZoomIn &&
              evs[j].action.regions.count(r)) {
            seen_before = true;
          }
        }
        if (seen_before) out.push_back(Violation::RepeatedZoomRegion);
      }
    }
  }
  return out;
}

inline bool same_multiset(std::vector<Violation> a, std::vector<Violation> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

// The 7-symbol action alphabet used for exhaustive enumeration:
// detect(ok), detect(fail), zoom(one region) x4, answer.
inline constexpr int kAlphabetSize = 7;

inline TrajectoryEvent alphabet_event(int symbol, int step) {
  TrajectoryEvent ev;
  ev.step = step;
  if (symbol == 0 || symbol == 1) {
    ev.action.type = ActionType::DetectAlign;
    if (symbol == 0) {
      ev.observation.type = ObsType::AlignedFace;
      for (Region r : all_regions()) {
        ev.observation.boxes[r] = Box{0, 0, 1, 1};
      }
    } else {
      ev.observation.type = ObsType::DetectionFailed;
    }
  } else if (symbol >= 2 && symbol <= 5) {
    ev.action.type = ActionType::ZoomIn;
    const Region r = static_cast<Region>(symbol - 2);
    ev.action.regions = {r};
    ev.observation.type = ObsType::RoiCrops;
    ev.observation.regions = {r};
  } else {
    ev.action.type = ActionType::Answer;
    ev.action.prediction = Prediction{Emotion::Happiness,
                                      AuSet::from_ids({6, 12})};
    ev.observation.type = ObsType::None;
  }
  return ev;
}

inline Trajectory alphabet_trajectory(const std::vector<int>& symbols) {
  std::vector<TrajectoryEvent> events;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    events.push_back(alphabet_event(symbols[i], static_cast<int>(i) + 1));
  }
  return make_trajectory(std::move(events));
}

}  // namespace uclab::testing
