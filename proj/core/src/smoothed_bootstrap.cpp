#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthdebias/generators.hpp"

namespace synthdebias {

namespace {

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

SmoothedBootstrapGenerator::SmoothedBootstrapGenerator(const Table& train, double bandwidth_rule,
                                                       double centres_exponent, Rng& rng)
    : train_n_(train.rows()) {
  const std::size_t n = train.rows();
  const auto wanted = static_cast<std::size_t>(
      std::ceil(std::pow(static_cast<double>(n), centres_exponent) - 1e-9));
  const std::size_t kept = std::clamp<std::size_t>(wanted, 1, n);
  if (kept == n) {
    centres_ = train;
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `kept` entries are a uniform subset.
    for (std::size_t i = 0; i < kept; ++i) std::swap(order[i], order[i + rng.index(n - i)]);
    order.resize(kept);
    centres_ = train.select_rows(order);
  }
  bandwidths_.assign(train.cols(), 0.0);
  const double shrink = std::pow(static_cast<double>(n), -0.2);
  for (std::size_t j = 0; j < train.cols(); ++j) {
    if (train.schema()[j].kind.kind() != Kind::kContinuous) continue;
    bandwidths_[j] = bandwidth_rule * 1.06 * sample_sd(train.column(j)) * shrink;
  }
}

Table SmoothedBootstrapGenerator::sample(std::size_t m, Rng& rng) const {
  const std::size_t d = centres_.cols();
  std::vector<std::vector<double>> out(d, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = rng.index(centres_.rows());
    for (std::size_t j = 0; j < d; ++j) {
      double v = centres_.at(r, j);
      if (bandwidths_[j] > 0.0) v += bandwidths_[j] * rng.normal();
      out[j][i] = v;
    }
  }
  return Table(centres_.schema(), std::move(out));
}

}  // namespace synthdebias
