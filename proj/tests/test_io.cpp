#include <doctest.h>

#include "support/builders.hpp"
#include "uclab/trajectory_io.hpp"

using namespace uclab;
using namespace uclab::testing;

namespace {
TrajectoryRecord sample_record() {
  TrajectoryRecord rec;
  rec.id = "q0-r1";
  rec.group_id = "q0";
  rec.labels.emotion = Emotion::Fear;
  rec.labels.aus = AuSet::from_ids({1, 2, 4, 25, 26});
  rec.trajectory = make_traj(
      true, true, Prediction{Emotion::Fear, AuSet::from_ids({1, 2, 4})},
      {Region::EyePeriorbital, Region::MouthChin});
  return rec;
}
}  // namespace

TEST_CASE("serialize/parse round trip") {
  const TrajectoryRecord rec = sample_record();
  const std::string line = serialize_trajectory(rec);
  const TrajectoryRecord back = parse_trajectory(line);
  CHECK(back.id == rec.id);
  CHECK(back.group_id == rec.group_id);
  CHECK(back.labels.emotion == rec.labels.emotion);
  CHECK(back.labels.aus == rec.labels.aus);
  CHECK(back.trajectory == rec.trajectory);
  // serialization is stable
  CHECK(serialize_trajectory(back) == line);
}

TEST_CASE("round trip over random trajectories") {
  RngStream rng(99);
  for (int i = 0; i < 200; ++i) {
    RolloutGroup g = random_group(rng);
    TrajectoryRecord rec;
    rec.id = "t" + std::to_string(i);
    rec.group_id = "g" + std::to_string(i / 5);
    rec.labels = g.labels;
    rec.trajectory = g.trajectories[0];
    const TrajectoryRecord back =
        parse_trajectory(serialize_trajectory(rec));
    CHECK(back.trajectory == rec.trajectory);
    CHECK(back.labels.aus == rec.labels.aus);
  }
}

TEST_CASE("derived fields are recomputed, not trusted") {
  TrajectoryRecord rec = sample_record();
  std::string line = serialize_trajectory(rec);
  // The record claims zoom_used=false although it contains a zoom event.
  const std::string from = "\"zoom_used\":true";
  const auto pos = line.find(from);
  REQUIRE(pos != std::string::npos);
  line.replace(pos, from.size(), "\"zoom_used\":false");
  const TrajectoryRecord back = parse_trajectory(line);
  CHECK(back.trajectory.zoom_used);
}

TEST_CASE("truncated record raises ParseError") {
  const std::string line = serialize_trajectory(sample_record());
  CHECK_THROWS_AS(parse_trajectory(line.substr(0, line.size() / 2)),
                  ParseError);
}

TEST_CASE("unknown fields are rejected") {
  std::string line = serialize_trajectory(sample_record());
  line.insert(1, "\"confidence\":0.9,");
  try {
    parse_trajectory(line);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "record.confidence");
  }
}

TEST_CASE("schema violations name the field") {
  try {
    parse_trajectory(R"({"id":"a","group_id":"g","emotion_label":"joyful",)"
                     R"("au_label":"1","events":[]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "emotion_label");
  }
  try {
    parse_trajectory(R"({"id":"a","group_id":"g","emotion_label":"sad",)"
                     R"("au_label":"1,x","events":[]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "au_label");
  }
  try {
    parse_trajectory(
        R"({"id":"a","group_id":"g","emotion_label":"sad","au_label":"1",)"
        R"("events":[{"step":1,"action":{"kind":"zoom_in","regions":[]},)"
        R"("observation":{"kind":"roi_crops","regions":[]}}]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "events[0].action.regions");
  }
}

TEST_CASE("parse errors carry a byte offset for malformed json") {
  try {
    parse_trajectory("{\"id\":");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() > 0);
  }
}
