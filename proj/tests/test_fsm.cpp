#include <doctest.h>

#include "support/builders.hpp"
#include "support/fsm_oracle.hpp"
#include "uclab/fsm.hpp"

using namespace uclab;
using namespace uclab::testing;

namespace {
Prediction happy() { return {Emotion::Happiness, AuSet::from_ids({6, 12})}; }
}  // namespace

TEST_CASE("minimal legal trajectory") {
  const Trajectory t = make_traj(true, false, happy());
  const FsmVerdict v = validate(t, 4);
  CHECK(v.legal);
  CHECK(v.violations.empty());
  CHECK(v.r_fsm == 0.0);
}

TEST_CASE("zoom after failed detection") {
  const Trajectory t = make_traj(false, true, happy(), {Region::Nose});
  const FsmVerdict v = validate(t, 4);
  CHECK(!v.legal);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0] == Violation::ZoomAfterFailedDetect);
  CHECK(v.r_fsm == doctest::Approx(-0.2));
}

TEST_CASE("budget exceeded") {
  // detect + three zooms + answer = 5 events > budget 4
  std::vector<TrajectoryEvent> events;
  events.push_back(detect_event(1, true));
  events.push_back(zoom_event(2, {Region::Nose}));
  events.push_back(zoom_event(3, {Region::MouthChin}));
  events.push_back(zoom_event(4, {Region::EyePeriorbital}));
  events.push_back(answer_event(5, happy()));
  const FsmVerdict v = validate(make_trajectory(std::move(events)), 4);
  CHECK(!v.legal);
  bool found = false;
  for (Violation x : v.violations) found |= x == Violation::BudgetExceeded;
  CHECK(found);
  CHECK(v.violations.size() == 1);
}

TEST_CASE("zoom before detect and missing answer") {
  std::vector<TrajectoryEvent> events;
  events.push_back(zoom_event(1, {Region::Nose}));
  const FsmVerdict v = validate(make_trajectory(std::move(events)), 4);
  CHECK(same_multiset(v.violations, {Violation::ZoomBeforeDetect,
                                     Violation::MissingAnswer}));
}

TEST_CASE("repeated detect and repeated zoom region") {
  std::vector<TrajectoryEvent> events;
  events.push_back(detect_event(1, true));
  events.push_back(detect_event(2, true));
  events.push_back(zoom_event(3, {Region::Nose}));
  events.push_back(zoom_event(4, {Region::Nose, Region::MouthChin}));
  const FsmVerdict v = validate(make_trajectory(std::move(events)), 6);
  CHECK(same_multiset(v.violations,
                      {Violation::RepeatedDetect, Violation::RepeatedZoomRegion,
                       Violation::MissingAnswer}));
}

TEST_CASE("answer not last, one violation per trailing event") {
  std::vector<TrajectoryEvent> events;
  events.push_back(detect_event(1, true));
  events.push_back(answer_event(2, happy()));
  events.push_back(zoom_event(3, {Region::Nose}));
  events.push_back(answer_event(4, happy()));
  const FsmVerdict v = validate(make_trajectory(std::move(events)), 6);
  CHECK(same_multiset(v.violations,
                      {Violation::AnswerNotLast, Violation::AnswerNotLast}));
}

TEST_CASE("malformed events") {
  SUBCASE("broken step numbering") {
    std::vector<TrajectoryEvent> events;
    events.push_back(detect_event(1, true));
    events.push_back(answer_event(3, happy()));  // should be step 2
    const FsmVerdict v = validate(make_trajectory(std::move(events)), 4);
    CHECK(same_multiset(v.violations, {Violation::MalformedEvent}));
  }
  SUBCASE("observation kind mismatched with action") {
    TrajectoryEvent ev = detect_event(1, true);
    ev.observation.type = ObsType::RoiCrops;
    ev.observation.boxes.clear();
    std::vector<TrajectoryEvent> events{ev, answer_event(2, happy())};
    const FsmVerdict v = validate(make_trajectory(std::move(events)), 4);
    CHECK(same_multiset(v.violations, {Violation::MalformedEvent}));
  }
  SUBCASE("degenerate aligned-face box") {
    TrajectoryEvent ev = detect_event(1, true);
    ev.observation.boxes[Region::Nose] = Box{5, 5, 5, 9};  // x1 == x2
    std::vector<TrajectoryEvent> events{ev, answer_event(2, happy())};
    const FsmVerdict v = validate(make_trajectory(std::move(events)), 4);
    CHECK(same_multiset(v.violations, {Violation::MalformedEvent}));
  }
  SUBCASE("roi crops disagree with zoom regions") {
    TrajectoryEvent ev = zoom_event(2, {Region::Nose});
    ev.observation.regions = {Region::MouthChin};
    std::vector<TrajectoryEvent> events{detect_event(1, true), ev,
                                        answer_event(3, happy())};
    const FsmVerdict v = validate(make_trajectory(std::move(events)), 4);
    CHECK(same_multiset(v.violations, {Violation::MalformedEvent}));
  }
}

TEST_CASE("r_fsm floor") {
  // Six violations at kappa 0.2 clamp to the floor of -1.
  std::vector<TrajectoryEvent> events;
  events.push_back(zoom_event(1, {Region::Nose}));        // before detect
  events.push_back(zoom_event(2, {Region::Nose}));        // before + repeat
  events.push_back(zoom_event(3, {Region::Nose}));        // before + repeat
  events.push_back(zoom_event(4, {Region::Nose}));        // before + repeat
  const FsmVerdict v = validate(make_trajectory(std::move(events)), 3);
  // 4x before-detect + 3x repeated + budget + missing answer = 9
  CHECK(v.violations.size() == 9);
  CHECK(v.r_fsm == -1.0);
}

TEST_CASE("derived trajectory fields") {
  const Trajectory t = make_traj(true, true, happy(), {Region::MouthChin});
  CHECK(t.zoom_used);
  CHECK(t.detection_ok);
  REQUIRE(t.prediction.has_value());
  CHECK(t.prediction->emotion == Emotion::Happiness);

  const Trajectory f = make_traj(false, false, std::nullopt);
  CHECK(!f.zoom_used);
  CHECK(!f.detection_ok);
  CHECK(!f.prediction);
}

TEST_CASE("incremental step matches initial-state transitions") {
  ProtocolState s = initial_state(4);
  CHECK(step(s, detect_event(1, true)).empty());
  CHECK(s.detect_ok);
  CHECK(step(s, zoom_event(2, {Region::MouthChin})).empty());
  CHECK(s.zoomed.count(Region::MouthChin) == 1);

  ProtocolState bad = initial_state(4);
  const auto v = step(bad, zoom_event(1, {Region::Nose}));
  CHECK(same_multiset(v, {Violation::ZoomBeforeDetect}));
}

TEST_CASE("step-folding equals batch validate on random sequences") {
  RngStream rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const int len = 1 + static_cast<int>(rng.next_u64() % 6);
    std::vector<int> symbols;
    for (int i = 0; i < len; ++i) {
      symbols.push_back(static_cast<int>(rng.next_u64() % kAlphabetSize));
    }
    const Trajectory traj = alphabet_trajectory(symbols);
    const int budget = 1 + static_cast<int>(rng.next_u64() % 6);

    ProtocolState state = initial_state(budget);
    std::vector<Violation> folded;
    for (const auto& ev : traj.events) {
      const auto v = step(state, ev);
      folded.insert(folded.end(), v.begin(), v.end());
    }
    const auto tail = finish(state);
    folded.insert(folded.end(), tail.begin(), tail.end());

    const FsmVerdict batch = validate(traj, budget);
    CHECK(folded == batch.violations);
  }
}

TEST_CASE("validate agrees with the declarative oracle on random sequences") {
  RngStream rng(13);
  for (int trial = 0; trial < 3000; ++trial) {
    const int len = 1 + static_cast<int>(rng.next_u64() % 7);
    std::vector<int> symbols;
    for (int i = 0; i < len; ++i) {
      symbols.push_back(static_cast<int>(rng.next_u64() % kAlphabetSize));
    }
    const Trajectory traj = alphabet_trajectory(symbols);
    const int budget = 1 + static_cast<int>(rng.next_u64() % 6);
    const FsmVerdict v = validate(traj, budget);
    CHECK(same_multiset(v.violations, oracle_violations(traj, budget)));
    CHECK(v.legal == oracle_violations(traj, budget).empty());
    CHECK(v.r_fsm <= 0.0);
    CHECK((v.r_fsm == 0.0) == v.legal);
  }
}
