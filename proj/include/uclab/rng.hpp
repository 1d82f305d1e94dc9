#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace uclab {

/// Deterministic random stream (xoshiro256++ core, splitmix64 seeding).
/// All distributions are implemented in-house so that draws are
/// bit-identical across platforms and standard-library versions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  /// Standard normal via Box-Muller (fresh pair per call, spare discarded).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; any shape > 0.
  double gamma(double shape);

  /// Beta(a, b) from two gamma draws.
  double beta(double a, double b);

  /// Index drawn from unnormalized nonnegative weights.
  int categorical(std::span<const double> weights);

 private:
  std::uint64_t s_[4];
};

/// Derives an independent child seed from a master seed and a path of
/// integers naming the consumer (e.g. {step, query, rollout}). Stable
/// hash chain; the same path always yields the same stream.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

}  // namespace uclab
