#pragma once
// Deterministic random streams.
//
// Every stochastic concern (mobility, channel, traffic, policy, ...) pulls from
// its own named stream derived from the run seed, so adding draws to one concern
// never perturbs another. The engine is std::mt19937_64, whose output sequence
// is pinned by the standard; all distributions are implemented here by hand
// because the std::* distribution objects are not bit-portable across standard
// library implementations.

#include <cstdint>
#include <random>
#include <string_view>

namespace wdtn {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

class RngStream {
 public:
  RngStream() : engine_(0) {}
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t u64() { return engine_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n), n >= 1 (128-bit multiply, no modulo bias worth
  // caring about at n << 2^64).
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal();

  // Gamma(shape, 1), shape > 0 (Marsaglia-Tsang, with the U^(1/a) boost for
  // shape < 1).
  double gamma(double shape);

  // Beta(a, b) as Ga/(Ga+Gb).
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Child stream fully determined by (parent_seed, label); distinct labels give
// statistically independent streams.
RngStream split_stream(std::uint64_t parent_seed, std::string_view label);

}  // namespace wdtn
