#include "uclab/fsm.hpp"

#include <algorithm>

namespace uclab {

namespace {
constexpr std::array<std::string_view, kRegionCount> kRegionNames{
    "forehead_eyebrow", "eye_periorbital", "nose", "mouth_chin"};

constexpr std::array<std::string_view, 8> kViolationNames{
    "missing_answer",        "answer_not_last",     "zoom_before_detect",
    "zoom_after_failed_detect", "repeated_detect",  "repeated_zoom_region",
    "budget_exceeded",       "malformed_event"};

bool event_well_formed(const TrajectoryEvent& ev, int expected_step) {
  if (ev.step != expected_step) return false;
  switch (ev.action.type) {
    case ActionType::DetectAlign: {
      if (!ev.action.regions.empty() || ev.action.prediction) return false;
      if (ev.observation.type == ObsType::AlignedFace) {
        if (ev.observation.boxes.size() != kRegionCount) return false;
        for (Region r : all_regions()) {
          auto it = ev.observation.boxes.find(r);
          if (it == ev.observation.boxes.end() || !it->second.valid()) {
            return false;
          }
        }
        return ev.observation.regions.empty();
      }
      return ev.observation.type == ObsType::DetectionFailed &&
             ev.observation.boxes.empty() && ev.observation.regions.empty();
    }
    case ActionType::ZoomIn: {
      if (ev.action.regions.empty() || ev.action.prediction) return false;
      return ev.observation.type == ObsType::RoiCrops &&
             ev.observation.boxes.empty() &&
             ev.observation.regions == ev.action.regions;
    }
    case ActionType::Answer: {
      if (!ev.action.regions.empty() || !ev.action.prediction) return false;
      return ev.observation.type == ObsType::None &&
             ev.observation.boxes.empty() && ev.observation.regions.empty();
    }
  }
  return false;
}
}  // namespace

std::string_view region_name(Region r) {
  return kRegionNames[static_cast<std::size_t>(r)];
}

std::optional<Region> region_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRegionNames.size(); ++i) {
    if (kRegionNames[i] == name) return static_cast<Region>(i);
  }
  return std::nullopt;
}

std::string_view violation_name(Violation v) {
  return kViolationNames[static_cast<std::size_t>(v)];
}

Trajectory make_trajectory(std::vector<TrajectoryEvent> events) {
  Trajectory t;
  t.events = std::move(events);
  for (const auto& ev : t.events) {
    switch (ev.action.type) {
      case ActionType::DetectAlign:
        t.detection_ok = ev.observation.type == ObsType::AlignedFace;
        break;
      case ActionType::ZoomIn:
        t.zoom_used = true;
        break;
      case ActionType::Answer:
        if (!t.prediction) t.prediction = ev.action.prediction;
        break;
    }
  }
  return t;
}

ProtocolState initial_state(int budget) {
  ProtocolState s;
  s.budget = budget;
  return s;
}

std::vector<Violation> step(ProtocolState& state, const TrajectoryEvent& ev) {
  std::vector<Violation> out;
  state.events_seen += 1;
  if (state.events_seen == state.budget + 1) {
    out.push_back(Violation::BudgetExceeded);
  }
  if (!event_well_formed(ev, state.next_step)) {
    out.push_back(Violation::MalformedEvent);
  }
  state.next_step = ev.step + 1;

  if (state.answered) out.push_back(Violation::AnswerNotLast);

  switch (ev.action.type) {
    case ActionType::DetectAlign:
      if (state.detect_seen) out.push_back(Violation::RepeatedDetect);
      state.detect_seen = true;
      state.detect_ok = ev.observation.type == ObsType::AlignedFace;
      break;
    case ActionType::ZoomIn:
      if (!state.detect_seen) {
        out.push_back(Violation::ZoomBeforeDetect);
      } else if (!state.detect_ok) {
        out.push_back(Violation::ZoomAfterFailedDetect);
      }
      for (Region r : ev.action.regions) {
        if (state.zoomed.count(r)) {
          out.push_back(Violation::RepeatedZoomRegion);
        }
      }
      state.zoomed.insert(ev.action.regions.begin(), ev.action.regions.end());
      break;
    case ActionType::Answer:
      state.answered = true;
      break;
  }
  return out;
}

std::vector<Violation> finish(const ProtocolState& state) {
  if (!state.answered) return {Violation::MissingAnswer};
  return {};
}

FsmVerdict validate(const Trajectory& traj, int budget, double kappa,
                    double r_fsm_min) {
  FsmVerdict verdict;
  ProtocolState state = initial_state(budget);
  for (const auto& ev : traj.events) {
    auto v = step(state, ev);
    verdict.violations.insert(verdict.violations.end(), v.begin(), v.end());
  }
  auto tail = finish(state);
  verdict.violations.insert(verdict.violations.end(), tail.begin(), tail.end());

  verdict.legal = verdict.violations.empty();
  verdict.r_fsm = verdict.legal
                      ? 0.0
                      : std::max(r_fsm_min,
                                 -kappa * static_cast<double>(
                                              verdict.violations.size()));
  return verdict;
}

}  // namespace uclab
