#include <doctest.h>

#include <cmath>

#include "uclab/policy.hpp"

using namespace uclab;

namespace {
PolicyParams random_params(RngStream& rng, double scale = 1.5) {
  PolicyParams p;
  for (double& w : p.zoom_w) w = rng.uniform(-scale, scale);
  p.zoom_b = rng.uniform(-scale, scale);
  for (auto& row : p.region_w) {
    for (double& w : row) w = rng.uniform(-scale, scale);
  }
  for (double& b : p.region_b) b = rng.uniform(-scale, scale);
  for (double& w : p.answer_w) w = rng.uniform(-scale, scale);
  p.answer_b = rng.uniform(-scale, scale);
  return p;
}

FeatureVec random_features(RngStream& rng) {
  return {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
          rng.uniform(0.0, 1.0), rng.uniform(-0.1, 0.1)};
}
}  // namespace

TEST_CASE("outcome probabilities form a distribution") {
  RngStream rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const PolicyParams p = random_params(rng);
    const FeatureVec f = random_features(rng);
    const OutcomeTable t = enumerate_outcomes(p, f);
    double total = 0.0;
    for (const auto& e : t.entries) {
      CHECK(e.prob >= 0.0);
      CHECK(std::abs(std::exp(e.logprob) - e.prob) <= 1e-12);
      total += e.prob;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zoom probability follows the logistic of the zoom head") {
  PolicyParams p;
  FeatureVec f{0.5, 0.5, 0.25, 0.0};
  p.zoom_b = 0.0;
  CHECK(enumerate_outcomes(p, f).zoom_prob == doctest::Approx(0.5));
  p.zoom_b = 50.0;
  CHECK(enumerate_outcomes(p, f).zoom_prob == doctest::Approx(1.0));
  RngStream rng(1);
  for (int i = 0; i < 50; ++i) {
    CHECK(policy_decision(p, f, rng).zoom);
  }
  p.zoom_b = -50.0;
  for (int i = 0; i < 50; ++i) {
    CHECK(!policy_decision(p, f, rng).zoom);
  }
}

TEST_CASE("decision sampling is deterministic given the stream seed") {
  RngStream prng(43);
  const PolicyParams p = random_params(prng);
  const FeatureVec f = random_features(prng);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RngStream a(seed), b(seed);
    const Decision da = policy_decision(p, f, a);
    const Decision db = policy_decision(p, f, b);
    CHECK(da.zoom == db.zoom);
    CHECK(da.regions == db.regions);
    CHECK(da.logprob == db.logprob);
  }
}

TEST_CASE("zoom decisions always carry a nonempty region set") {
  RngStream rng(47);
  // push every region logit far negative so raw draws are nearly
  // always empty and the argmax fallback engages
  PolicyParams p;
  p.zoom_b = 50.0;
  for (double& b : p.region_b) b = -8.0;
  p.region_b[2] = -7.0;  // nose has the highest logit
  const FeatureVec f{0.5, 0.5, 0.25, 0.0};
  int fallback_hits = 0;
  for (int i = 0; i < 300; ++i) {
    const Decision d = policy_decision(p, f, rng);
    REQUIRE(d.zoom);
    CHECK(!d.regions.empty());
    if (d.regions == std::set<Region>{Region::Nose}) ++fallback_hits;
  }
  CHECK(fallback_hits > 250);
}

TEST_CASE("sampled frequencies match outcome probabilities") {
  RngStream prng(53);
  const PolicyParams p = random_params(prng, 0.8);
  const FeatureVec f = random_features(prng);
  const OutcomeTable table = enumerate_outcomes(p, f);

  std::array<int, kOutcomeCount> hits{};
  const int n = 200000;
  RngStream rng(7);
  for (int i = 0; i < n; ++i) {
    const Decision d = policy_decision(p, f, rng);
    const std::uint8_t mask = region_mask_of(d.regions);
    for (int o = 0; o < kOutcomeCount; ++o) {
      if (table.entries[o].zoom == d.zoom &&
          table.entries[o].region_mask == mask) {
        hits[o] += 1;
        break;
      }
    }
  }
  for (int o = 0; o < kOutcomeCount; ++o) {
    const double freq = static_cast<double>(hits[o]) / n;
    CHECK(std::abs(freq - table.entries[o].prob) < 0.01);
  }
}

TEST_CASE("logprob gradients match finite differences at the logit level") {
  RngStream rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    PolicyParams p = random_params(rng);
    const FeatureVec f = random_features(rng);
    const OutcomeTable base = enumerate_outcomes(p, f);
    const double h = 1e-6;
    for (int o = 0; o < kOutcomeCount; ++o) {
      // zoom logit via the bias
      PolicyParams up = p, dn = p;
      up.zoom_b += h;
      dn.zoom_b -= h;
      const double fd = (enumerate_outcomes(up, f).entries[o].logprob -
                         enumerate_outcomes(dn, f).entries[o].logprob) /
                        (2 * h);
      CHECK(std::abs(fd - base.entries[o].dlogp[0]) < 1e-5);
    }
    // one region logit
    for (int r = 0; r < kRegionCount; ++r) {
      PolicyParams up = p, dn = p;
      up.region_b[r] += h;
      dn.region_b[r] -= h;
      const OutcomeTable tu = enumerate_outcomes(up, f);
      const OutcomeTable td = enumerate_outcomes(dn, f);
      for (int o = 0; o < kOutcomeCount; ++o) {
        const double fd =
            (tu.entries[o].logprob - td.entries[o].logprob) / (2 * h);
        CHECK(std::abs(fd - base.entries[o].dlogp[1 + r]) < 1e-5);
      }
    }
  }
}

TEST_CASE("entropy bounds") {
  RngStream rng(61);
  const double max_entropy = std::log(16.0);
  for (int trial = 0; trial < 200; ++trial) {
    const PolicyParams p = random_params(rng);
    const FeatureVec f = random_features(rng);
    const double h = decision_entropy(enumerate_outcomes(p, f));
    CHECK(h >= 0.0);
    CHECK(h <= max_entropy + 1e-12);
  }
}

TEST_CASE("kl is zero at the reference and positive elsewhere") {
  RngStream rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const PolicyParams p = random_params(rng);
    const FeatureVec f = random_features(rng);
    const OutcomeTable t = enumerate_outcomes(p, f);
    CHECK(decision_kl(t, t) == doctest::Approx(0.0).epsilon(1e-12));
    const PolicyParams q = random_params(rng);
    const OutcomeTable tq = enumerate_outcomes(q, f);
    CHECK(decision_kl(t, tq) >= -1e-12);
  }
}

TEST_CASE("policy checkpoint round trip") {
  RngStream rng(71);
  const PolicyParams p = random_params(rng);
  const PolicyParams back = PolicyParams::from_json(p.to_json());
  CHECK(back == p);
  CHECK(PolicyParams::unflatten(p.flatten()) == p);
}
