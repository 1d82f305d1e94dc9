#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "uclab/fsm.hpp"

namespace uclab {

/// Schema violation while reading a trajectory log line. Carries the
/// byte offset within the line and the offending field's name.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t byte_offset, std::string field, std::string what);

  std::size_t byte_offset() const { return byte_offset_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t byte_offset_;
  std::string field_;
};

/// One log record: a trajectory plus its identity and ground truth.
struct TrajectoryRecord {
  std::string id;
  std::string group_id;
  TaskLabels labels;
  Trajectory trajectory;
};

// Log format: one JSON object per line with fields
//   id, group_id, emotion_label, au_label,
//   events: [{step, action: {kind, regions?, prediction?},
//             observation: {kind, boxes?, regions?}, thought?}]
// plus optional zoom_used / detection_ok, whose values are ignored and
// recomputed from the events. Unknown fields are rejected.

/// Parses one log line. Throws ParseError on any schema violation.
TrajectoryRecord parse_trajectory(const std::string& line);

/// Serializes a record to one log line (no trailing newline). The
/// derived fields are emitted from the recomputed trajectory.
std::string serialize_trajectory(const TrajectoryRecord& record);

}  // namespace uclab
