#include <doctest.h>

#include <cmath>

#include "uclab/calibration.hpp"
#include "uclab/rng.hpp"

using namespace uclab;

namespace {
const CalibrationParams kParams;  // defaults

DeltaBatch batch_for(Emotion e, std::vector<double> values) {
  DeltaBatch b;
  b[static_cast<int>(e)] = std::move(values);
  return b;
}
}  // namespace

TEST_CASE("fresh calibrator snapshot") {
  EmaCalibrator cal;
  const CalibratorView v = cal.snapshot();
  for (int i = 0; i < kEmotionCount; ++i) {
    CHECK(v.delta_bar[i] == 0.0);
    CHECK(v.counts[i] == 0);
  }
  CHECK(v.step == 0);
}

TEST_CASE("snapshot is unaffected by later updates") {
  EmaCalibrator cal;
  cal.update(batch_for(Emotion::Fear, {0.5}), kParams);
  const CalibratorView before = cal.snapshot();
  const CalibratorView again = cal.snapshot();
  CHECK(before == again);
  cal.update(batch_for(Emotion::Fear, {0.9}), kParams);
  CHECK(before.delta_bar[static_cast<int>(Emotion::Fear)] ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK(cal.snapshot().delta_bar[static_cast<int>(Emotion::Fear)] !=
        before.delta_bar[static_cast<int>(Emotion::Fear)]);
}

TEST_CASE("ema update examples") {
  // rho 0.2, previous 0.1, batch mean 0.5 -> 0.18
  CalibrationParams p = kParams;
  p.rho = 0.2;
  EmaCalibrator cal;
  // seed the previous value 0.1 with rho=1 first
  CalibrationParams warm = p;
  warm.rho = 1.0;
  cal.update(batch_for(Emotion::Sad, {0.1}), warm);
  cal.update(batch_for(Emotion::Sad, {0.4, 0.6}), p);  // mean 0.5
  CHECK(cal.snapshot().delta_bar[static_cast<int>(Emotion::Sad)] ==
        doctest::Approx(0.18).epsilon(1e-12));
  CHECK(cal.snapshot().counts[static_cast<int>(Emotion::Sad)] == 2);
  CHECK(cal.snapshot().step == 2);

  // empty batch leaves the emotion untouched but advances the step
  cal.update(DeltaBatch{}, p);
  CHECK(cal.snapshot().delta_bar[static_cast<int>(Emotion::Sad)] ==
        doctest::Approx(0.18).epsilon(1e-12));
  CHECK(cal.snapshot().counts[static_cast<int>(Emotion::Sad)] == 2);
  CHECK(cal.snapshot().step == 3);

  // rho = 1 tracks the latest batch mean exactly
  EmaCalibrator fresh;
  fresh.update(batch_for(Emotion::Anger, {0.7, 0.1}), warm);
  CHECK(fresh.snapshot().delta_bar[static_cast<int>(Emotion::Anger)] ==
        doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("modulation factors") {
  EmaCalibrator cal;
  SUBCASE("pre-activation returns exactly (1,1)") {
    for (int i = 0; i < kParams.activation_min_updates - 1; ++i) {
      cal.update(batch_for(Emotion::Contempt, {0.5}), kParams);
      const auto [lazy, unnec] =
          modulation_factors(cal.snapshot(), Emotion::Contempt, kParams);
      CHECK(lazy == 1.0);
      CHECK(unnec == 1.0);
    }
  }
  SUBCASE("activated factors follow the logistic map") {
    CalibratorView v;
    v.counts[static_cast<int>(Emotion::Fear)] = kParams.activation_min_updates;
    v.delta_bar[static_cast<int>(Emotion::Fear)] = 0.5;
    const auto [lazy, unnec] = modulation_factors(v, Emotion::Fear, kParams);
    CHECK(lazy == doctest::Approx(1.3807970779778822).epsilon(1e-12));
    CHECK(unnec == doctest::Approx(0.6192029220221176).epsilon(1e-12));

    v.delta_bar[static_cast<int>(Emotion::Fear)] = 0.0;
    const auto [l0, u0] = modulation_factors(v, Emotion::Fear, kParams);
    CHECK(l0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("activation is per-emotion") {
    CalibratorView v;
    v.counts[static_cast<int>(Emotion::Fear)] = 100;
    v.delta_bar[static_cast<int>(Emotion::Fear)] = 0.3;
    v.delta_bar[static_cast<int>(Emotion::Sad)] = 0.3;
    CHECK(modulation_factors(v, Emotion::Fear, kParams).first > 1.0);
    CHECK(modulation_factors(v, Emotion::Sad, kParams).first == 1.0);
  }
}

TEST_CASE("factor map monotonicity, bounds and complementarity") {
  CalibratorView v;
  v.counts.fill(kParams.activation_min_updates);
  double prev_lazy = -1e9, prev_unnec = 1e9;
  for (int k = 0; k <= 1000; ++k) {
    const double bar = -2.0 + 4.0 * k / 1000.0;
    v.delta_bar[0] = bar;
    const auto [lazy, unnec] =
        modulation_factors(v, Emotion::Neutral, kParams);
    CHECK(lazy > prev_lazy);
    CHECK(unnec < prev_unnec);
    CHECK(lazy >= kParams.phi_min);
    CHECK(lazy <= kParams.phi_max);
    CHECK(unnec >= kParams.phi_min);
    CHECK(unnec <= kParams.phi_max);
    CHECK(std::abs(lazy + unnec - (kParams.phi_min + kParams.phi_max)) <=
          1e-12);
    prev_lazy = lazy;
    prev_unnec = unnec;
  }
}

TEST_CASE("ema contraction") {
  // batch means confined to [a,b] keep the ema in [min(a,0), max(b,0)]
  RngStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(-1.0, 1.0);
    const double b = a + rng.uniform(0.0, 1.0);
    EmaCalibrator cal;
    for (int n = 0; n < 200; ++n) {
      cal.update(batch_for(Emotion::Disgust, {rng.uniform(a, b)}), kParams);
      const double bar =
          cal.snapshot().delta_bar[static_cast<int>(Emotion::Disgust)];
      CHECK(bar >= std::min(a, 0.0) - 1e-12);
      CHECK(bar <= std::max(b, 0.0) + 1e-12);
    }
  }
}

TEST_CASE("checkpoint round trip") {
  EmaCalibrator cal;
  cal.update(batch_for(Emotion::Contempt, {0.31}), kParams);
  cal.update(batch_for(Emotion::Sad, {-0.17, 0.05}), kParams);
  const EmaCalibrator back = EmaCalibrator::from_json(cal.to_json());
  CHECK(back.snapshot() == cal.snapshot());
}
