#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace synthdebias {

// Seeded stream used everywhere randomness is needed.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Every derived variate is computed here rather than through
// <random> distributions, whose algorithms are implementation-defined:
//   uniform()   (u64 >> 11) * 2^-53, in [0, 1)
//   normal()    Wichura's AS241 inverse CDF applied to an open-interval uniform
//   index(n)    Lemire's multiply-shift with rejection (unbiased)
// so a given seed produces the same draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform();
  // Strictly inside (0, 1).
  double uniform_open();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n);
  // probs need not be normalized; the last positive entry absorbs round-off.
  std::size_t categorical(std::span<const double> probs);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Order-sensitive mix of a base seed with any number of integer parts.
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> parts);

// Inverse standard normal CDF (AS241, PPND16), accurate to about 1e-16.
double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace synthdebias
