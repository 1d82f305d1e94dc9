#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "uclab/fsm.hpp"
#include "uclab/rng.hpp"

namespace uclab {

inline constexpr int kFeatureDim = 4;
using FeatureVec = std::array<double, kFeatureDim>;

/// Parametric decision model over observable sample features. Three
/// heads: zoom (Bernoulli logit), region (4 independent Bernoulli
/// logits), answer timing. Stopping after alignment without zooming is
/// the complement of the zoom decision, so the answer-timing head takes
/// no part in sampling and receives no gradient; it is kept for the
/// checkpoint surface.
struct PolicyParams {
  std::array<double, kFeatureDim> zoom_w{};
  double zoom_b = 0.0;
  std::array<std::array<double, kFeatureDim>, kRegionCount> region_w{};
  std::array<double, kRegionCount> region_b{};
  std::array<double, kFeatureDim> answer_w{};
  double answer_b = 0.0;

  bool operator==(const PolicyParams&) const = default;

  std::string to_json() const;
  static PolicyParams from_json(const std::string& text);

  // Flat layout used by the optimizer and the finite-difference tests:
  // [zoom_w(4), zoom_b, region_w(4x4 row-major), region_b(4),
  //  answer_w(4), answer_b] = 30 values.
  static constexpr int kFlatDim =
      (kFeatureDim + 1) + kRegionCount * (kFeatureDim + 1) + (kFeatureDim + 1);
  std::array<double, kFlatDim> flatten() const;
  static PolicyParams unflatten(const std::array<double, kFlatDim>& flat);
};

struct Decision {
  bool zoom = false;
  std::set<Region> regions;  // nonempty iff zoom
  double logprob = 0.0;
};

/// Number of compound outcomes: no-zoom plus zoom with any of the 15
/// nonempty region subsets.
inline constexpr int kOutcomeCount = 16;

/// Distribution over compound decisions at one feature point, with the
/// gradient of each outcome's log-probability w.r.t. the 5 logits
/// (zoom logit, then the 4 region logits).
///
/// Sampling: zoom ~ Bernoulli(sigmoid(zoom logit)); if zoom, each region
/// independently from its logit; an empty draw falls back to the single
/// highest-logit region (ties to the lowest region index), so the
/// probability of that one-region set absorbs the empty draw's mass.
struct OutcomeTable {
  struct Entry {
    bool zoom = false;
    std::uint8_t region_mask = 0;  // bit r set = region r included
    double prob = 0.0;
    double logprob = 0.0;
    std::array<double, 5> dlogp{};  // d logprob / d logit
  };
  std::array<Entry, kOutcomeCount> entries{};  // [0] = no-zoom
  double zoom_prob = 0.0;
  int argmax_region = 0;

  const Entry& find(bool zoom, std::uint8_t region_mask) const;
};

double zoom_logit(const PolicyParams& params, const FeatureVec& f);
double region_logit(const PolicyParams& params, const FeatureVec& f, int r);

OutcomeTable enumerate_outcomes(const PolicyParams& params,
                                const FeatureVec& f);

/// Samples a compound decision; logprob is exact for the sampled
/// (zoom, regions) pair including the empty-draw fallback mass.
Decision policy_decision(const PolicyParams& params, const FeatureVec& f,
                         RngStream& rng);

std::uint8_t region_mask_of(const std::set<Region>& regions);
std::set<Region> regions_of_mask(std::uint8_t mask);

/// Entropy of the compound decision distribution at one feature point.
double decision_entropy(const OutcomeTable& table);

/// KL(theta || ref) over compound decisions at one feature point.
double decision_kl(const OutcomeTable& theta, const OutcomeTable& ref);

}  // namespace uclab
