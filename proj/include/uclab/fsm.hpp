#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uclab/core.hpp"

namespace uclab {

/// The four canonical facial regions a zoom may target.
enum class Region {
  ForeheadEyebrow = 0,
  EyePeriorbital,
  Nose,
  MouthChin,
};

inline constexpr int kRegionCount = 4;

constexpr std::array<Region, kRegionCount> all_regions() {
  return {Region::ForeheadEyebrow, Region::EyePeriorbital, Region::Nose,
          Region::MouthChin};
}

std::string_view region_name(Region r);
std::optional<Region> region_from_name(std::string_view name);

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool valid() const { return x1 < x2 && y1 < y2; }
  bool operator==(const Box&) const = default;
};

enum class ActionType { DetectAlign, ZoomIn, Answer };

struct Action {
  ActionType type = ActionType::DetectAlign;
  std::set<Region> regions;              // ZoomIn only; nonempty
  std::optional<Prediction> prediction;  // Answer only

  bool operator==(const Action&) const = default;
};

enum class ObsType { AlignedFace, DetectionFailed, RoiCrops, None };

struct Observation {
  ObsType type = ObsType::None;
  std::map<Region, Box> boxes;  // AlignedFace: exactly the 4 regions
  std::set<Region> regions;     // RoiCrops: mirrors the action's regions

  bool operator==(const Observation&) const = default;
};

struct TrajectoryEvent {
  int step = 1;  // consecutive from 1
  Action action;
  Observation observation;
  std::string thought;  // opaque; the FSM never inspects it

  bool operator==(const TrajectoryEvent&) const = default;
};

/// One rollout. The derived fields (zoom_used, detection_ok, prediction)
/// are always recomputed from the events, never trusted from input.
struct Trajectory {
  std::vector<TrajectoryEvent> events;
  bool detection_ok = false;  // last DetectAlign succeeded; false if none
  bool zoom_used = false;     // some event is a ZoomIn
  std::optional<Prediction> prediction;  // from the Answer event, if any

  bool operator==(const Trajectory&) const = default;
};

/// Recomputes the derived fields from the event list.
Trajectory make_trajectory(std::vector<TrajectoryEvent> events);

enum class Violation {
  MissingAnswer = 0,
  AnswerNotLast,
  ZoomBeforeDetect,
  ZoomAfterFailedDetect,
  RepeatedDetect,
  RepeatedZoomRegion,
  BudgetExceeded,
  MalformedEvent,
};

std::string_view violation_name(Violation v);

struct FsmVerdict {
  std::vector<Violation> violations;
  bool legal = true;    // true iff violations is empty
  double r_fsm = 0.0;   // 0 when legal, else -kappa * count, floored
};

// Violation semantics, shared by batch validation, the incremental state
// machine, and the test oracles:
//   MalformedEvent       per event whose intrinsic fields are broken
//                        (step numbering not consecutive from 1, empty
//                        zoom region set, observation kind inconsistent
//                        with the action kind, aligned-face boxes not
//                        exactly the 4 canonical regions or degenerate,
//                        roi-crop regions differing from the action's).
//   AnswerNotLast        per event strictly after the first Answer.
//   RepeatedDetect       per DetectAlign after the first.
//   ZoomBeforeDetect     per ZoomIn with no prior DetectAlign.
//   ZoomAfterFailedDetect per ZoomIn whose latest DetectAlign failed.
//   RepeatedZoomRegion   per region of a ZoomIn already zoomed earlier.
//   BudgetExceeded       once, when the event count first exceeds budget.
//   MissingAnswer        once, at end of trajectory, if no Answer.
// Region bookkeeping is unconditional: every ZoomIn records its regions
// even if the zoom itself was illegal.

/// Incremental validation state. Fold step() over the events and then
/// finish(); the concatenated violations equal validate()'s list.
struct ProtocolState {
  int budget = 4;
  int events_seen = 0;
  int next_step = 1;
  bool answered = false;
  bool detect_seen = false;
  bool detect_ok = false;
  std::set<Region> zoomed;
};

ProtocolState initial_state(int budget);
std::vector<Violation> step(ProtocolState& state, const TrajectoryEvent& ev);
std::vector<Violation> finish(const ProtocolState& state);

/// Batch validation. Never fails: malformed inputs produce
/// MalformedEvent violations. r_fsm = max(r_fsm_min, -kappa * count).
FsmVerdict validate(const Trajectory& traj, int budget,
                    double kappa = 0.2, double r_fsm_min = -1.0);

}  // namespace uclab
