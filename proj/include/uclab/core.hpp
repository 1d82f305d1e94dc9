#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uclab {

/// The eight discrete emotion categories every sample and label carries.
enum class Emotion {
  Neutral = 0,
  Happiness,
  Sad,
  Surprise,
  Fear,
  Disgust,
  Anger,
  Contempt,
};

inline constexpr int kEmotionCount = 8;

constexpr std::array<Emotion, kEmotionCount> all_emotions() {
  return {Emotion::Neutral,  Emotion::Happiness, Emotion::Sad,
          Emotion::Surprise, Emotion::Fear,      Emotion::Disgust,
          Emotion::Anger,    Emotion::Contempt};
}

/// Lowercase canonical name ("neutral", "happiness", ...).
std::string_view emotion_name(Emotion e);
std::optional<Emotion> emotion_from_name(std::string_view name);

/// The 8-AU protocol set the simulator restricts itself to.
inline constexpr std::array<int, 8> kProtocolAus{1, 2, 4, 6, 9, 12, 25, 26};

/// Set of facial action-unit identifiers. Identifiers are positive
/// integers, stored sorted ascending, no duplicates. The canonical text
/// form is comma-separated ascending integers, e.g. "1,4,12".
class AuSet {
 public:
  AuSet() = default;

  /// Builds a set from arbitrary ids; duplicates collapse. Throws
  /// std::invalid_argument if any id is < 1.
  static AuSet from_ids(std::span<const int> ids);
  static AuSet from_ids(std::initializer_list<int> ids);

  /// Parses the canonical text form. Empty string parses to the empty
  /// set. Returns nullopt on malformed input (non-integers, ids < 1).
  static std::optional<AuSet> parse(std::string_view text);

  std::string to_string() const;

  bool contains(int id) const;
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<int>& ids() const { return ids_; }

  bool operator==(const AuSet&) const = default;

 private:
  std::vector<int> ids_;  // sorted ascending, unique
};

/// Final structured output of a terminated trajectory.
struct Prediction {
  Emotion emotion = Emotion::Neutral;
  AuSet aus;

  bool operator==(const Prediction&) const = default;
};

/// Ground truth for one query; immutable per query.
struct TaskLabels {
  Emotion emotion = Emotion::Neutral;
  AuSet aus;
};

/// Instance-level AU-set F1: 2|pred∩target| / (|pred|+|target|).
/// Both sets empty yields 1.0; exactly one empty yields 0.0.
double au_set_f1(const AuSet& pred, const AuSet& target);

}  // namespace uclab
