#include "uclab/policy.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace uclab {

using nlohmann::json;

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

json weights_to_json(const std::array<double, kFeatureDim>& w, double b) {
  json j;
  j["w"] = w;
  j["b"] = b;
  return j;
}
}  // namespace

std::string PolicyParams::to_json() const {
  json j;
  j["zoom"] = weights_to_json(zoom_w, zoom_b);
  json regions = json::array();
  for (int r = 0; r < kRegionCount; ++r) {
    regions.push_back(weights_to_json(region_w[r], region_b[r]));
  }
  j["regions"] = std::move(regions);
  j["answer"] = weights_to_json(answer_w, answer_b);
  return j.dump(2);
}

PolicyParams PolicyParams::from_json(const std::string& text) {
  const json j = json::parse(text);
  PolicyParams p;
  p.zoom_w = j.at("zoom").at("w").get<std::array<double, kFeatureDim>>();
  p.zoom_b = j.at("zoom").at("b").get<double>();
  const json& regions = j.at("regions");
  if (regions.size() != kRegionCount) {
    throw std::runtime_error("policy checkpoint: expected 4 region heads");
  }
  for (int r = 0; r < kRegionCount; ++r) {
    p.region_w[r] =
        regions[r].at("w").get<std::array<double, kFeatureDim>>();
    p.region_b[r] = regions[r].at("b").get<double>();
  }
  p.answer_w = j.at("answer").at("w").get<std::array<double, kFeatureDim>>();
  p.answer_b = j.at("answer").at("b").get<double>();
  return p;
}

std::array<double, PolicyParams::kFlatDim> PolicyParams::flatten() const {
  std::array<double, kFlatDim> flat{};
  int k = 0;
  for (double v : zoom_w) flat[k++] = v;
  flat[k++] = zoom_b;
  for (int r = 0; r < kRegionCount; ++r) {
    for (double v : region_w[r]) flat[k++] = v;
    flat[k++] = region_b[r];
  }
  for (double v : answer_w) flat[k++] = v;
  flat[k++] = answer_b;
  return flat;
}

PolicyParams PolicyParams::unflatten(
    const std::array<double, kFlatDim>& flat) {
  PolicyParams p;
  int k = 0;
  for (double& v : p.zoom_w) v = flat[k++];
  p.zoom_b = flat[k++];
  for (int r = 0; r < kRegionCount; ++r) {
    for (double& v : p.region_w[r]) v = flat[k++];
    p.region_b[r] = flat[k++];
  }
  for (double& v : p.answer_w) v = flat[k++];
  p.answer_b = flat[k++];
  return p;
}

double zoom_logit(const PolicyParams& params, const FeatureVec& f) {
  double l = params.zoom_b;
  for (int i = 0; i < kFeatureDim; ++i) l += params.zoom_w[i] * f[i];
  return l;
}

double region_logit(const PolicyParams& params, const FeatureVec& f, int r) {
  double l = params.region_b[r];
  for (int i = 0; i < kFeatureDim; ++i) l += params.region_w[r][i] * f[i];
  return l;
}

std::uint8_t region_mask_of(const std::set<Region>& regions) {
  std::uint8_t mask = 0;
  for (Region r : regions) mask |= std::uint8_t(1u << static_cast<int>(r));
  return mask;
}

std::set<Region> regions_of_mask(std::uint8_t mask) {
  std::set<Region> out;
  for (int r = 0; r < kRegionCount; ++r) {
    if (mask & (1u << r)) out.insert(static_cast<Region>(r));
  }
  return out;
}

OutcomeTable enumerate_outcomes(const PolicyParams& params,
                                const FeatureVec& f) {
  OutcomeTable table;
  const double lz = zoom_logit(params, f);
  const double pz = sigmoid(lz);
  table.zoom_prob = pz;

  std::array<double, kRegionCount> pr{};
  double best = -1.0;
  for (int r = 0; r < kRegionCount; ++r) {
    pr[r] = sigmoid(region_logit(params, f, r));
    if (pr[r] > best) {
      best = pr[r];
      table.argmax_region = r;
    }
  }
  const int amax = table.argmax_region;

  // Probability of drawing all four region Bernoullis as zero; this mass
  // moves onto the singleton {argmax}.
  double p_empty = 1.0;
  for (int r = 0; r < kRegionCount; ++r) p_empty *= 1.0 - pr[r];

  // Entry 0: no zoom.
  {
    auto& e = table.entries[0];
    e.zoom = false;
    e.region_mask = 0;
    e.prob = 1.0 - pz;
    e.logprob = std::log(e.prob);
    e.dlogp = {-pz, 0, 0, 0, 0};
  }

  // Entries 1..15: zoom with nonempty region mask.
  int slot = 1;
  for (std::uint8_t mask = 1; mask < (1u << kRegionCount); ++mask, ++slot) {
    auto& e = table.entries[slot];
    e.zoom = true;
    e.region_mask = mask;

    double p_draw = pz;
    for (int r = 0; r < kRegionCount; ++r) {
      p_draw *= (mask & (1u << r)) ? pr[r] : 1.0 - pr[r];
    }

    if (mask == (1u << amax)) {
      // Direct draw plus the redirected empty draw.
      const double p_direct = p_draw / pz;  // region product alone
      const double p_set = p_direct + p_empty;
      e.prob = pz * p_set;
      e.logprob = std::log(pz) + std::log(p_set);
      e.dlogp[0] = 1.0 - pz;
      for (int r = 0; r < kRegionCount; ++r) {
        // d p_set / d logit_r, then divide by p_set.
        double d_direct, d_empty;
        if (r == amax) {
          d_direct = p_direct * (1.0 - pr[r]);
          d_empty = -p_empty * pr[r];
        } else {
          d_direct = -p_direct * pr[r];
          d_empty = -p_empty * pr[r];
        }
        e.dlogp[1 + r] = (d_direct + d_empty) / p_set;
      }
    } else {
      e.prob = p_draw;
      e.logprob = std::log(p_draw);
      e.dlogp[0] = 1.0 - pz;
      for (int r = 0; r < kRegionCount; ++r) {
        e.dlogp[1 + r] = (mask & (1u << r)) ? 1.0 - pr[r] : -pr[r];
      }
    }
  }
  return table;
}

const OutcomeTable::Entry& OutcomeTable::find(bool zoom,
                                              std::uint8_t region_mask) const {
  if (!zoom) return entries[0];
  for (int i = 1; i < kOutcomeCount; ++i) {
    if (entries[i].region_mask == region_mask) return entries[i];
  }
  throw std::logic_error("no outcome entry for region mask");
}

Decision policy_decision(const PolicyParams& params, const FeatureVec& f,
                         RngStream& rng) {
  const OutcomeTable table = enumerate_outcomes(params, f);
  Decision d;
  d.zoom = rng.bernoulli(table.zoom_prob);
  if (!d.zoom) {
    d.logprob = table.entries[0].logprob;
    return d;
  }
  std::uint8_t mask = 0;
  for (int r = 0; r < kRegionCount; ++r) {
    const double pr = sigmoid(region_logit(params, f, r));
    if (rng.bernoulli(pr)) mask |= std::uint8_t(1u << r);
  }
  if (mask == 0) mask = std::uint8_t(1u << table.argmax_region);
  d.regions = regions_of_mask(mask);
  d.logprob = table.find(true, mask).logprob;
  return d;
}

double decision_entropy(const OutcomeTable& table) {
  double h = 0.0;
  for (const auto& e : table.entries) {
    if (e.prob > 0.0) h -= e.prob * e.logprob;
  }
  return h;
}

double decision_kl(const OutcomeTable& theta, const OutcomeTable& ref) {
  double kl = 0.0;
  for (int i = 0; i < kOutcomeCount; ++i) {
    if (theta.entries[i].prob > 0.0) {
      kl += theta.entries[i].prob *
            (theta.entries[i].logprob - ref.entries[i].logprob);
    }
  }
  return kl;
}

}  // namespace uclab
