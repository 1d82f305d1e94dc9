#include "uclab/calibration.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace uclab {

using nlohmann::json;

void EmaCalibrator::update(const DeltaBatch& batch,
                           const CalibrationParams& params) {
  for (int i = 0; i < kEmotionCount; ++i) {
    const auto& values = batch[i];
    if (values.empty()) continue;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    view_.delta_bar[i] =
        params.rho * mean + (1.0 - params.rho) * view_.delta_bar[i];
    view_.counts[i] += 1;
  }
  view_.step += 1;
}

std::string EmaCalibrator::to_json() const {
  json j;
  j["step"] = view_.step;
  json bars, counts;
  for (int i = 0; i < kEmotionCount; ++i) {
    const std::string name(emotion_name(static_cast<Emotion>(i)));
    bars[name] = view_.delta_bar[i];
    counts[name] = view_.counts[i];
  }
  j["delta_bar"] = std::move(bars);
  j["counts"] = std::move(counts);
  return j.dump(2);
}

EmaCalibrator EmaCalibrator::from_json(const std::string& text) {
  const json j = json::parse(text);
  EmaCalibrator cal;
  cal.view_.step = j.at("step").get<long>();
  for (int i = 0; i < kEmotionCount; ++i) {
    const std::string name(emotion_name(static_cast<Emotion>(i)));
    cal.view_.delta_bar[i] = j.at("delta_bar").at(name).get<double>();
    cal.view_.counts[i] = j.at("counts").at(name).get<int>();
  }
  return cal;
}

std::pair<double, double> modulation_factors(const CalibratorView& view,
                                             Emotion e,
                                             const CalibrationParams& params) {
  const int idx = static_cast<int>(e);
  if (view.counts[idx] < params.activation_min_updates) return {1.0, 1.0};
  const double span = params.phi_max - params.phi_min;
  const double x = params.phi_slope * view.delta_bar[idx];
  const auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  return {params.phi_min + span * sigmoid(x),
          params.phi_min + span * sigmoid(-x)};
}

}  // namespace uclab
