#include "uclab/trajectory_io.hpp"

#include <json.hpp>

namespace uclab {

using nlohmann::json;

ParseError::ParseError(std::size_t byte_offset, std::string field,
                       std::string what)
    : std::runtime_error("parse error at byte " + std::to_string(byte_offset) +
                         ", field '" + field + "': " + what),
      byte_offset_(byte_offset),
      field_(std::move(field)) {}

namespace {

[[noreturn]] void fail(std::size_t offset, const std::string& field,
                       const std::string& what) {
  throw ParseError(offset, field, what);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
  for (const char* k : required) {
    if (!obj.contains(k)) fail(0, where + "." + k, "missing field");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : required) known |= it.key() == k;
    for (const char* k : optional) known |= it.key() == k;
    if (!known) fail(0, where + "." + it.key(), "unknown field");
  }
}

Emotion parse_emotion(const json& j, const std::string& field) {
  if (!j.is_string()) fail(0, field, "expected string");
  auto e = emotion_from_name(j.get<std::string>());
  if (!e) fail(0, field, "unknown emotion name");
  return *e;
}

AuSet parse_aus(const json& j, const std::string& field) {
  if (!j.is_string()) fail(0, field, "expected string");
  auto s = AuSet::parse(j.get<std::string>());
  if (!s) fail(0, field, "malformed AU set");
  return *s;
}

std::set<Region> parse_regions(const json& j, const std::string& field) {
  if (!j.is_array()) fail(0, field, "expected array");
  std::set<Region> out;
  for (const auto& item : j) {
    if (!item.is_string()) fail(0, field, "expected region name");
    auto r = region_from_name(item.get<std::string>());
    if (!r) fail(0, field, "unknown region name");
    if (!out.insert(*r).second) fail(0, field, "duplicate region");
  }
  return out;
}

Prediction parse_prediction(const json& j, const std::string& field) {
  if (!j.is_object()) fail(0, field, "expected object");
  require_keys(j, field, {"emotion", "aus"}, {});
  Prediction p;
  p.emotion = parse_emotion(j.at("emotion"), field + ".emotion");
  p.aus = parse_aus(j.at("aus"), field + ".aus");
  return p;
}

TrajectoryEvent parse_event(const json& j, const std::string& field) {
  if (!j.is_object()) fail(0, field, "expected object");
  require_keys(j, field, {"step", "action", "observation"}, {"thought"});
  TrajectoryEvent ev;
  if (!j.at("step").is_number_integer()) {
    fail(0, field + ".step", "expected integer");
  }
  ev.step = j.at("step").get<int>();

  const json& act = j.at("action");
  if (!act.is_object()) fail(0, field + ".action", "expected object");
  require_keys(act, field + ".action", {"kind"}, {"regions", "prediction"});
  const std::string kind = act.at("kind").is_string()
                               ? act.at("kind").get<std::string>()
                               : std::string();
  if (kind == "detect_align") {
    ev.action.type = ActionType::DetectAlign;
  } else if (kind == "zoom_in") {
    ev.action.type = ActionType::ZoomIn;
    if (!act.contains("regions")) {
      fail(0, field + ".action.regions", "missing field");
    }
    ev.action.regions = parse_regions(act.at("regions"),
                                      field + ".action.regions");
    if (ev.action.regions.empty()) {
      fail(0, field + ".action.regions", "empty region set");
    }
  } else if (kind == "answer") {
    ev.action.type = ActionType::Answer;
    if (!act.contains("prediction")) {
      fail(0, field + ".action.prediction", "missing field");
    }
    ev.action.prediction =
        parse_prediction(act.at("prediction"), field + ".action.prediction");
  } else {
    fail(0, field + ".action.kind", "unknown action kind");
  }
  if (act.contains("regions") && ev.action.type != ActionType::ZoomIn) {
    fail(0, field + ".action.regions", "regions only valid for zoom_in");
  }
  if (act.contains("prediction") && ev.action.type != ActionType::Answer) {
    fail(0, field + ".action.prediction", "prediction only valid for answer");
  }

  const json& obs = j.at("observation");
  if (!obs.is_object()) fail(0, field + ".observation", "expected object");
  require_keys(obs, field + ".observation", {"kind"}, {"boxes", "regions"});
  const std::string okind = obs.at("kind").is_string()
                                ? obs.at("kind").get<std::string>()
                                : std::string();
  if (okind == "aligned_face") {
    ev.observation.type = ObsType::AlignedFace;
    if (!obs.contains("boxes")) {
      fail(0, field + ".observation.boxes", "missing field");
    }
    const json& boxes = obs.at("boxes");
    if (!boxes.is_object()) {
      fail(0, field + ".observation.boxes", "expected object");
    }
    for (auto it = boxes.begin(); it != boxes.end(); ++it) {
      auto r = region_from_name(it.key());
      if (!r) fail(0, field + ".observation.boxes", "unknown region name");
      const json& b = it.value();
      if (!b.is_array() || b.size() != 4 || !b[0].is_number() ||
          !b[1].is_number() || !b[2].is_number() || !b[3].is_number()) {
        fail(0, field + ".observation.boxes", "expected [x1,y1,x2,y2]");
      }
      ev.observation.boxes[*r] = Box{b[0].get<double>(), b[1].get<double>(),
                                     b[2].get<double>(), b[3].get<double>()};
    }
  } else if (okind == "detection_failed") {
    ev.observation.type = ObsType::DetectionFailed;
  } else if (okind == "roi_crops") {
    ev.observation.type = ObsType::RoiCrops;
    if (!obs.contains("regions")) {
      fail(0, field + ".observation.regions", "missing field");
    }
    ev.observation.regions =
        parse_regions(obs.at("regions"), field + ".observation.regions");
  } else if (okind == "none") {
    ev.observation.type = ObsType::None;
  } else {
    fail(0, field + ".observation.kind", "unknown observation kind");
  }
  if (obs.contains("boxes") && ev.observation.type != ObsType::AlignedFace) {
    fail(0, field + ".observation.boxes", "boxes only valid for aligned_face");
  }
  if (obs.contains("regions") && ev.observation.type != ObsType::RoiCrops) {
    fail(0, field + ".observation.regions",
         "regions only valid for roi_crops");
  }

  if (j.contains("thought")) {
    if (!j.at("thought").is_string()) {
      fail(0, field + ".thought", "expected string");
    }
    ev.thought = j.at("thought").get<std::string>();
  }
  return ev;
}

}  // namespace

TrajectoryRecord parse_trajectory(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, "<json>", e.what());
  }
  if (!j.is_object()) fail(0, "<root>", "expected object");
  require_keys(j, "record",
               {"id", "group_id", "emotion_label", "au_label", "events"},
               {"zoom_used", "detection_ok"});

  TrajectoryRecord rec;
  if (!j.at("id").is_string()) fail(0, "id", "expected string");
  rec.id = j.at("id").get<std::string>();
  if (!j.at("group_id").is_string()) fail(0, "group_id", "expected string");
  rec.group_id = j.at("group_id").get<std::string>();
  rec.labels.emotion = parse_emotion(j.at("emotion_label"), "emotion_label");
  rec.labels.aus = parse_aus(j.at("au_label"), "au_label");

  if (!j.at("events").is_array()) fail(0, "events", "expected array");
  std::vector<TrajectoryEvent> events;
  std::size_t idx = 0;
  for (const auto& item : j.at("events")) {
    events.push_back(parse_event(item, "events[" + std::to_string(idx) + "]"));
    ++idx;
  }
  // zoom_used / detection_ok in the input are ignored; derived fields
  // always come from the events.
  rec.trajectory = make_trajectory(std::move(events));
  return rec;
}

std::string serialize_trajectory(const TrajectoryRecord& record) {
  json j;
  j["id"] = record.id;
  j["group_id"] = record.group_id;
  j["emotion_label"] = std::string(emotion_name(record.labels.emotion));
  j["au_label"] = record.labels.aus.to_string();
  j["zoom_used"] = record.trajectory.zoom_used;
  j["detection_ok"] = record.trajectory.detection_ok;
  json events = json::array();
  for (const auto& ev : record.trajectory.events) {
    json e;
    e["step"] = ev.step;
    json act;
    switch (ev.action.type) {
      case ActionType::DetectAlign:
        act["kind"] = "detect_align";
        break;
      case ActionType::ZoomIn: {
        act["kind"] = "zoom_in";
        json regions = json::array();
        for (Region r : ev.action.regions) {
          regions.push_back(std::string(region_name(r)));
        }
        act["regions"] = std::move(regions);
        break;
      }
      case ActionType::Answer: {
        act["kind"] = "answer";
        json pred;
        pred["emotion"] =
            std::string(emotion_name(ev.action.prediction->emotion));
        pred["aus"] = ev.action.prediction->aus.to_string();
        act["prediction"] = std::move(pred);
        break;
      }
    }
    e["action"] = std::move(act);
    json obs;
    switch (ev.observation.type) {
      case ObsType::AlignedFace: {
        obs["kind"] = "aligned_face";
        json boxes;
        for (const auto& [r, b] : ev.observation.boxes) {
          boxes[std::string(region_name(r))] = {b.x1, b.y1, b.x2, b.y2};
        }
        obs["boxes"] = std::move(boxes);
        break;
      }
      case ObsType::DetectionFailed:
        obs["kind"] = "detection_failed";
        break;
      case ObsType::RoiCrops: {
        obs["kind"] = "roi_crops";
        json regions = json::array();
        for (Region r : ev.observation.regions) {
          regions.push_back(std::string(region_name(r)));
        }
        obs["regions"] = std::move(regions);
        break;
      }
      case ObsType::None:
        obs["kind"] = "none";
        break;
    }
    e["observation"] = std::move(obs);
    if (!ev.thought.empty()) e["thought"] = ev.thought;
    events.push_back(std::move(e));
  }
  j["events"] = std::move(events);
  return j.dump();
}

}  // namespace uclab
