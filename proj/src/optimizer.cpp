#include "uclab/optimizer.hpp"

#include <cmath>

namespace uclab {

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor) {
  const std::size_t n = rewards.size();
  std::vector<double> adv(n, 0.0);
  if (n == 0) return adv;
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n);  // population variance
  const double sigma = std::max(std::sqrt(var), std_floor);
  for (std::size_t i = 0; i < n; ++i) adv[i] = (rewards[i] - mean) / sigma;
  return adv;
}

namespace {

// Gradient of a per-feature-point quantity w.r.t. the 5 logits, chained
// onto the flat parameter vector. Logit order: zoom, region 0..3.
void chain_to_params(const std::array<double, 5>& dlogits,
                     const FeatureVec& f,
                     std::array<double, PolicyParams::kFlatDim>& grad,
                     double scale) {
  int k = 0;
  for (int i = 0; i < kFeatureDim; ++i) grad[k++] += scale * dlogits[0] * f[i];
  grad[k++] += scale * dlogits[0];
  for (int r = 0; r < kRegionCount; ++r) {
    for (int i = 0; i < kFeatureDim; ++i) {
      grad[k++] += scale * dlogits[1 + r] * f[i];
    }
    grad[k++] += scale * dlogits[1 + r];
  }
  // answer head: complement of the zoom decision, no gradient
}

std::array<double, 5> kl_logit_gradient(const OutcomeTable& theta,
                                        const OutcomeTable& ref) {
  std::array<double, 5> g{};
  for (int o = 0; o < kOutcomeCount; ++o) {
    const auto& e = theta.entries[o];
    if (e.prob <= 0.0) continue;
    const double diff = e.logprob - ref.entries[o].logprob;
    for (int j = 0; j < 5; ++j) g[j] += e.prob * e.dlogp[j] * diff;
  }
  return g;
}

std::array<double, 5> entropy_logit_gradient(const OutcomeTable& theta) {
  std::array<double, 5> g{};
  for (const auto& e : theta.entries) {
    if (e.prob <= 0.0) continue;
    for (int j = 0; j < 5; ++j) g[j] -= e.prob * e.dlogp[j] * e.logprob;
  }
  return g;
}

struct DecisionRef {
  bool has_decision = false;
  bool zoom = false;
  std::uint8_t mask = 0;
};

DecisionRef decision_of(const Trajectory& traj) {
  DecisionRef d;
  if (!traj.detection_ok) return d;  // forced holistic answer, no decision
  d.has_decision = true;
  d.zoom = traj.zoom_used;
  std::set<Region> regions;
  for (const auto& ev : traj.events) {
    if (ev.action.type == ActionType::ZoomIn) {
      regions.insert(ev.action.regions.begin(), ev.action.regions.end());
    }
  }
  d.mask = region_mask_of(regions);
  return d;
}

}  // namespace

double surrogate_value(const PolicyParams& params,
                       std::span<const ScoredGroup> groups,
                       const PolicyParams& ref, const OptimizerConfig& cfg) {
  const double traj_norm =
      1.0 / (static_cast<double>(groups.size()) * cfg.group_size);
  const double query_norm = 1.0 / static_cast<double>(groups.size());
  double value = 0.0;
  for (const auto& sg : groups) {
    const OutcomeTable theta = enumerate_outcomes(params, sg.features);
    const OutcomeTable rtab = enumerate_outcomes(ref, sg.features);

    std::vector<double> totals;
    totals.reserve(sg.group.trajectories.size());
    for (const auto& b : *sg.group.rewards) totals.push_back(b.total);
    const std::vector<double> adv = group_advantages(totals, cfg.std_floor);

    for (std::size_t i = 0; i < sg.group.trajectories.size(); ++i) {
      const DecisionRef d = decision_of(sg.group.trajectories[i]);
      if (!d.has_decision) continue;
      value += traj_norm * adv[i] * theta.find(d.zoom, d.mask).logprob;
    }
    value -= cfg.kl_coef * query_norm * decision_kl(theta, rtab);
    value += cfg.ent_coef * query_norm * decision_entropy(theta);
  }
  return value;
}

std::array<double, PolicyParams::kFlatDim> surrogate_gradient(
    const PolicyParams& params, std::span<const ScoredGroup> groups,
    const PolicyParams& ref, const OptimizerConfig& cfg) {
  std::array<double, PolicyParams::kFlatDim> grad{};
  const double traj_norm =
      1.0 / (static_cast<double>(groups.size()) * cfg.group_size);
  const double query_norm = 1.0 / static_cast<double>(groups.size());
  for (const auto& sg : groups) {
    const OutcomeTable theta = enumerate_outcomes(params, sg.features);
    const OutcomeTable rtab = enumerate_outcomes(ref, sg.features);

    std::vector<double> totals;
    totals.reserve(sg.group.trajectories.size());
    for (const auto& b : *sg.group.rewards) totals.push_back(b.total);
    const std::vector<double> adv = group_advantages(totals, cfg.std_floor);

    for (std::size_t i = 0; i < sg.group.trajectories.size(); ++i) {
      const DecisionRef d = decision_of(sg.group.trajectories[i]);
      if (!d.has_decision) continue;
      chain_to_params(theta.find(d.zoom, d.mask).dlogp, sg.features, grad,
                      traj_norm * adv[i]);
    }
    chain_to_params(kl_logit_gradient(theta, rtab), sg.features, grad,
                    -cfg.kl_coef * query_norm);
    chain_to_params(entropy_logit_gradient(theta), sg.features, grad,
                    cfg.ent_coef * query_norm);
  }
  return grad;
}

PolicyParams update_step(const PolicyParams& params,
                         std::span<const ScoredGroup> groups,
                         const PolicyParams& ref, const OptimizerConfig& cfg,
                         StepMetrics* metrics) {
  const auto grad = surrogate_gradient(params, groups, ref, cfg);
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw NonFiniteGradient("non-finite policy gradient component");
    }
  }
  auto flat = params.flatten();
  for (int i = 0; i < PolicyParams::kFlatDim; ++i) {
    flat[i] += cfg.learning_rate * grad[i];
  }

  if (metrics) {
    StepMetrics m;
    std::size_t n_traj = 0, n_zoom = 0, n_correct = 0;
    double sum_abs_adv = 0.0;
    for (const auto& sg : groups) {
      const OutcomeTable theta = enumerate_outcomes(params, sg.features);
      const OutcomeTable rtab = enumerate_outcomes(ref, sg.features);
      m.kl += decision_kl(theta, rtab);
      m.entropy += decision_entropy(theta);
      std::vector<double> totals;
      for (const auto& b : *sg.group.rewards) totals.push_back(b.total);
      const std::vector<double> adv = group_advantages(totals, cfg.std_floor);
      for (std::size_t i = 0; i < sg.group.trajectories.size(); ++i) {
        const auto& t = sg.group.trajectories[i];
        const auto& b = (*sg.group.rewards)[i];
        m.mean_reward += b.total;
        m.mean_r_acc += b.r_acc;
        sum_abs_adv += std::abs(adv[i]);
        n_traj += 1;
        if (t.zoom_used) n_zoom += 1;
        if (t.prediction && t.prediction->emotion == sg.group.labels.emotion) {
          n_correct += 1;
        }
      }
    }
    const double nq = static_cast<double>(groups.size());
    const double nt = static_cast<double>(n_traj);
    m.kl /= nq;
    m.entropy /= nq;
    m.mean_reward /= nt;
    m.mean_r_acc /= nt;
    m.mean_abs_advantage = sum_abs_adv / nt;
    m.zoom_ratio = static_cast<double>(n_zoom) / nt;
    m.accuracy = static_cast<double>(n_correct) / nt;
    *metrics = m;
  }
  return PolicyParams::unflatten(flat);
}

}  // namespace uclab
