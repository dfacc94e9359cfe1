#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "synthdebias/random.hpp"

using namespace synthdebias;

TEST_CASE("normal quantile matches reference values") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-14));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
  for (double p : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-6})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("streams are reproducible and seed-sensitive") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    (void)c;
  }
  Rng d(42), e(43);
  CHECK(d.next_u64() != e.next_u64());
}

TEST_CASE("uniform draws lie in [0,1) and open draws strictly inside") {
  Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 5 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("normal draws have unit variance") {
  Rng rng(2);
  const int k = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < k; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / k) < 5 / std::sqrt(double(k)));
  // Var of z^2 is 2.
  CHECK(std::abs(ss / k - 1.0) < 5 * std::sqrt(2.0 / k));
}

TEST_CASE("index is unbiased over a small range") {
  Rng rng(3);
  const int k = 7, draws = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < draws; ++i) ++counts[rng.index(k)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 22.46);  // chi-square 6 df, p = 0.001
  CHECK_THROWS(rng.index(0));
}

TEST_CASE("categorical follows unnormalized weights") {
  Rng rng(4);
  const std::vector<double> w{1.0, 0.0, 3.0};
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 40000; ++i) ++counts[rng.categorical(w)];
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] / 40000.0 - 0.25) < 5 * std::sqrt(0.25 * 0.75 / 40000));
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(5);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(std::span<int>(v));
  CHECK(std::set<int>(v.begin(), v.end()).size() == 10);
}

TEST_CASE("derived seeds depend on every part and its order") {
  const auto s = derive_seed(7, {1, 2, 3});
  CHECK(s == derive_seed(7, {1, 2, 3}));
  CHECK(s != derive_seed(7, {1, 3, 2}));
  CHECK(s != derive_seed(8, {1, 2, 3}));
  CHECK(s != derive_seed(7, {1, 2, 3, 0}));
}
