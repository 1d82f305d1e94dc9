#pragma once

#include <array>
#include <string>
#include <vector>

#include "uclab/core.hpp"

namespace uclab {

struct CalibrationParams {
  double rho = 0.1;               // EMA rate, in (0, 1]
  int activation_min_updates = 10;  // per-emotion updates before factors move
  double phi_min = 0.5;           // factor bounds straddling 1
  double phi_max = 1.5;
  double phi_slope = 4.0;         // sigmoid steepness of the factor map
};

/// Immutable view of the calibrator at a point in time. Scorers read
/// views; only the optimizer loop mutates the calibrator itself.
struct CalibratorView {
  std::array<double, kEmotionCount> delta_bar{};  // running utility means
  std::array<int, kEmotionCount> counts{};        // per-emotion update counts
  long step = 0;

  bool operator==(const CalibratorView&) const = default;
};

/// Grouped utility-gap values for one optimization step, keyed by the
/// ground-truth emotion of the originating query.
using DeltaBatch = std::array<std::vector<double>, kEmotionCount>;

/// Emotion-wise EMA of the contrastive utility gap. Single writer;
/// snapshots may be read concurrently.
class EmaCalibrator {
 public:
  CalibratorView snapshot() const { return view_; }

  /// One optimization step's worth of gap values. Emotions with a
  /// nonempty batch get delta_bar <- rho*mean + (1-rho)*delta_bar and
  /// their count incremented by one; others are untouched. The step
  /// index always advances by one.
  void update(const DeltaBatch& batch, const CalibrationParams& params);

  std::string to_json() const;
  static EmaCalibrator from_json(const std::string& text);

 private:
  CalibratorView view_;
};

/// Bounded modulation factors (phi_lazy, phi_unnec) for one emotion.
/// Before activation both are exactly 1. After activation,
///   phi_lazy  = phi_min + (phi_max-phi_min) * sigmoid( slope*delta_bar)
///   phi_unnec = phi_min + (phi_max-phi_min) * sigmoid(-slope*delta_bar)
/// so emotions with historically useful zooms penalize missed zooms more.
std::pair<double, double> modulation_factors(const CalibratorView& view,
                                             Emotion e,
                                             const CalibrationParams& params);

}  // namespace uclab
