#include "uclab/core.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace uclab {

namespace {
constexpr std::array<std::string_view, kEmotionCount> kEmotionNames{
    "neutral", "happiness", "sad",   "surprise",
    "fear",    "disgust",   "anger", "contempt"};
}  // namespace

std::string_view emotion_name(Emotion e) {
  return kEmotionNames[static_cast<std::size_t>(e)];
}

std::optional<Emotion> emotion_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionNames.size(); ++i) {
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

AuSet AuSet::from_ids(std::span<const int> ids) {
  AuSet s;
  s.ids_.assign(ids.begin(), ids.end());
  for (int id : s.ids_) {
    if (id < 1) throw std::invalid_argument("AU identifiers must be >= 1");
  }
  std::sort(s.ids_.begin(), s.ids_.end());
  s.ids_.erase(std::unique(s.ids_.begin(), s.ids_.end()), s.ids_.end());
  return s;
}

AuSet AuSet::from_ids(std::initializer_list<int> ids) {
  return from_ids(std::span<const int>(ids.begin(), ids.size()));
}

std::optional<AuSet> AuSet::parse(std::string_view text) {
  AuSet s;
  if (text.empty()) return s;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view tok = text.substr(
        pos, comma == std::string_view::npos ? std::string_view::npos
                                             : comma - pos);
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || value < 1) {
      return std::nullopt;
    }
    s.ids_.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::sort(s.ids_.begin(), s.ids_.end());
  if (std::adjacent_find(s.ids_.begin(), s.ids_.end()) != s.ids_.end()) {
    return std::nullopt;  // duplicates are not canonical
  }
  return s;
}

std::string AuSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids_[i]);
  }
  return out;
}

bool AuSet::contains(int id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

double au_set_f1(const AuSet& pred, const AuSet& target) {
  if (pred.empty() && target.empty()) return 1.0;
  std::size_t inter = 0;
  for (int id : pred.ids()) {
    if (target.contains(id)) ++inter;
  }
  return 2.0 * static_cast<double>(inter) /
         static_cast<double>(pred.size() + target.size());
}

}  // namespace uclab
