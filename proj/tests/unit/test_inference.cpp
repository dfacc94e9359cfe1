#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "synthdebias/errors.hpp"
#include "synthdebias/inference.hpp"

using namespace synthdebias;

namespace {

EstimatorFit mean_fit(std::vector<double> v) {
  return estimate_mean(Table(Schema({{"v", ColumnKind::continuous()}}), {std::move(v)}), "v");
}

}  // namespace

TEST_CASE("classical SE of the mean") {
  const auto fit = mean_fit({1, 2, 3});
  CHECK(se_mle(fit, EstimandSpec::mean("v")) == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(se_mle(mean_fit({5}), EstimandSpec::mean("v")) == 0.0);
}

TEST_CASE("influence-curve SE with and without the synthetic term") {
  const auto fit = mean_fit({1, 2, 3});
  CHECK(se_eic(fit, 3) == doctest::Approx(2.0 / 3.0));
  CHECK(se_eic(fit) == doctest::Approx(std::sqrt(2.0) / 3.0));
  CHECK_THROWS_AS(se_eic(fit, 0), ValidationError);
}

TEST_CASE("EIC to classical SE ratio for the mean is sqrt((m-1)/m)") {
  Rng rng(1);
  for (std::size_t m : {2u, 7u, 50u, 1000u}) {
    std::vector<double> v(m);
    for (auto& x : v) x = rng.normal(3.0, 2.0);
    const auto fit = mean_fit(v);
    const double ratio = se_eic(fit) / se_mle(fit, EstimandSpec::mean("v"));
    CHECK(ratio == doctest::Approx(std::sqrt((m - 1.0) / m)).epsilon(1e-12));
  }
}

TEST_CASE("risk difference SE") {
  const Schema s({{"g", ColumnKind::binary()}, {"y", ColumnKind::binary()}});
  std::vector<double> g(200), y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    g[i] = i < 100 ? 0 : 1;
    y[i] = i % 2;
  }
  const auto fit = estimate_risk_difference(Table(s, {g, y}), "y", "g");
  CHECK(se_mle(fit, EstimandSpec::risk_difference("y", "g")) == doctest::Approx(0.0707107));

  const Schema c({{"g", ColumnKind::binary()}, {"y", ColumnKind::continuous()}});
  const auto cont = estimate_risk_difference(Table(c, {{0, 0, 1, 1}, {0, 2, 1, 5}}), "y", "g");
  // Arm variances 2 and 8 with two rows each.
  CHECK(se_mle(cont, EstimandSpec::risk_difference("y", "g")) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("lincoef classical SE matches the dummy-regression formula") {
  Rng rng(2);
  const std::size_t n = 60;
  std::vector<double> x(n), a(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(i % 3);
    a[i] = rng.normal(x[i], 1.0);
    y[i] = 0.5 * a[i] + x[i] + rng.normal();
  }
  const Table t(testing::xy_schema({"p", "q", "r"}), {x, a, y});
  const auto spec = EstimandSpec::lincoef("y", "a", {"x"});
  Rng r(3);
  const auto fit = estimate(t, spec, Method::kMle, 1, r);

  double sa[3] = {}, sy[3] = {}, cnt[3] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(x[i]);
    sa[k] += a[i];
    sy[k] += y[i];
    cnt[k] += 1;
  }
  double saa = 0, say = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(x[i]);
    saa += (a[i] - sa[k] / cnt[k]) * (a[i] - sa[k] / cnt[k]);
    say += (a[i] - sa[k] / cnt[k]) * (y[i] - sy[k] / cnt[k]);
  }
  const double beta = say / saa;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(x[i]);
    const double e = (y[i] - sy[k] / cnt[k]) - beta * (a[i] - sa[k] / cnt[k]);
    rss += e * e;
  }
  const double expected = std::sqrt(rss / double(n - 3 - 1) / saa);
  CHECK(se_mle(fit, spec) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("correction factor") {
  CHECK(correction_factor(100, 100) == doctest::Approx(std::sqrt(2.0)));
  CHECK(correction_factor(100, 300) == doctest::Approx(2.0));
}

TEST_CASE("Wald intervals") {
  const auto ci = wald_ci(0.0, 1.0);
  CHECK(ci.low == doctest::Approx(-1.959964));
  CHECK(ci.high == doctest::Approx(1.959964));
  const auto half = wald_ci(2.0, 1.0, 0.5);
  CHECK(half.high - 2.0 == doctest::Approx(0.6744898));
  CHECK(wald_ci(1.0, 0.0).low == 1.0);
  CHECK_THROWS_AS(wald_ci(0.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(wald_ci(0.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("coverage is inclusive at both ends") {
  const Interval ci{-1.0, 2.0};
  CHECK(covers(ci, -1.0));
  CHECK(covers(ci, 2.0));
  CHECK(covers(ci, 0.5));
  CHECK_FALSE(covers(ci, std::nextafter(2.0, 3.0)));
  CHECK_FALSE(covers(ci, std::nextafter(-1.0, -2.0)));
}

TEST_CASE("SE range filter") {
  CHECK(se_in_range(kMinSe));
  CHECK(se_in_range(kMaxSe));
  CHECK_FALSE(se_in_range(0.0));
  CHECK_FALSE(se_in_range(1e-11));
  CHECK_FALSE(se_in_range(100.5));
  CHECK_FALSE(se_in_range(std::nan("")));
}

TEST_CASE("reports pick the SE named by the fit method") {
  auto fit = mean_fit({1, 2, 3});
  fit.method = Method::kEic;
  const auto syn = make_report(fit, EstimandSpec::mean("v"), DataKind::kDebiasedSynthetic, 3);
  CHECK(syn.selected_se() == syn.se_eic);
  CHECK(syn.se_eic == doctest::Approx(2.0 / 3.0));
  CHECK(syn.ci.high - syn.theta == doctest::Approx(kZ975 * 2.0 / 3.0));
  CHECK(syn.se_mle_corrected == doctest::Approx(syn.se_mle * std::sqrt(2.0)));

  fit.method = Method::kMle;
  const auto orig = make_report(fit, EstimandSpec::mean("v"), DataKind::kOriginal, 3);
  CHECK(orig.selected_se() == orig.se_mle);
  CHECK(orig.se_mle_corrected == orig.se_mle);
  CHECK(orig.se_eic == doctest::Approx(std::sqrt(2.0) / 3.0));
  CHECK(std::string(data_kind_name(DataKind::kDefaultSynthetic)) == "default");
}
