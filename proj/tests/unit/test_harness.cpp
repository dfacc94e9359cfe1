#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>

#include "synthdebias/errors.hpp"
#include "synthdebias/harness.hpp"

using namespace synthdebias;

namespace {

StudyConfig tiny() {
  StudyConfig c;
  c.seed = 99;
  c.n_grid = {40, 80, 160};
  c.runs = 3;
  c.generators = {GeneratorSpec::parse("parametric")};
  c.estimands = {{EstimandSpec::parse("mean:age"), true}};
  c.debias.k_large = 2000;
  c.debias.k_cond = 500;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("power law recovers an exact exponent") {
  const std::vector<double> n{50, 160, 500, 1600, 5000};
  std::vector<double> se;
  for (double x : n) se.push_back(3.0 * std::pow(x, -0.37));
  const auto fit = fit_power_law(n, se);
  CHECK(fit.a == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(fit.log_c == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.a_low == doctest::Approx(fit.a).epsilon(1e-9));
  CHECK(fit.a_high == doctest::Approx(fit.a).epsilon(1e-9));
  CHECK(fit.points == 5);
}

TEST_CASE("power law edge cases") {
  const std::vector<double> n{10, 100, 1000};
  const std::vector<double> flat{2, 2, 2};
  CHECK(std::abs(fit_power_law(n, flat).a) < 1e-12);
  const std::vector<double> two_n{10, 100};
  const std::vector<double> two_se{1, 0.3};
  CHECK_THROWS_AS(fit_power_law(two_n, two_se), ValidationError);
  const std::vector<double> bad{1, 0, 1};
  CHECK_THROWS_AS(fit_power_law(n, bad), ValidationError);
}

TEST_CASE("power law interval uses t quantiles on points - 2 df") {
  // Slopes -0.4, -0.6 around a mean of -0.5: residuals of +-0.05 log units.
  const std::vector<double> n{1, std::exp(1.0), std::exp(2.0), std::exp(3.0)};
  const std::vector<double> logse{0.0, -0.45, -1.05, -1.5};
  std::vector<double> se;
  for (double l : logse) se.push_back(std::exp(l));
  const auto fit = fit_power_law(n, se);
  // Hand OLS: x = 0..3, xbar 1.5, sxx 5.
  double sxy = 0, ybar = 0;
  for (double l : logse) ybar += l / 4.0;
  for (int i = 0; i < 4; ++i) sxy += (i - 1.5) * (logse[i] - ybar);
  const double slope = sxy / 5.0;
  double rss = 0;
  for (int i = 0; i < 4; ++i) {
    const double e = logse[i] - ybar - slope * (i - 1.5);
    rss += e * e;
  }
  const double half = 4.302652729749464 * std::sqrt(rss / 2.0 / 5.0);  // t(0.975, 2)
  CHECK(fit.a == doctest::Approx(-slope));
  CHECK(fit.a_high - fit.a == doctest::Approx(half).epsilon(1e-9));
  CHECK(fit.a - fit.a_low == doctest::Approx(half).epsilon(1e-9));
}

TEST_CASE("type I error counts excluded nulls among valid runs") {
  std::vector<RunRecord> rs(4);
  for (auto& r : rs) {
    r.report = EstimateReport{};
    r.report->ci = {-1.0, 1.0};
  }
  CHECK(type1_error(rs, 0.0) == 0.0);
  CHECK(type1_error(rs, 5.0) == 1.0);
  rs[0].report->ci = {2.0, 3.0};
  rs[1].failure = Failure::kNonEstimable;
  CHECK(type1_error(rs, 0.0) == doctest::Approx(1.0 / 3.0));
  for (auto& r : rs) r.failure = Failure::kDebiasFailed;
  CHECK_THROWS_AS(type1_error(rs, 0.0), DomainError);
}

TEST_CASE("config validation") {
  auto c = tiny();
  CHECK_NOTHROW(c.validate());
  c.n_grid = {80, 40};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = tiny();
  c.runs = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = tiny();
  c.estimands.clear();
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = tiny();
  c.estimands = {{EstimandSpec::parse("mean:nope"), true}};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = tiny();
  c.m_rule = {MRule::Kind::kFixed, 1};
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("small study: layout, determinism, aggregation") {
  const auto config = tiny();
  const auto a = run_study(config);
  // Per (n, run): original plus default and debiased for one generator, two methods.
  CHECK(a.records.size() == 3 * 3 * 3 * 2);
  for (std::size_t i = 1; i < a.records.size(); ++i)
    CHECK_FALSE(record_less(a.records[i], a.records[i - 1]));
  for (const auto& r : a.records) {
    CHECK(r.truth == doctest::Approx(true_parameters(config.dgp).mean_age));
    if (r.data_kind == DataKind::kOriginal) {
      CHECK(r.generator == "-");
    } else {
      CHECK(r.generator == "parametric");
    }
    if (r.valid()) {
      CHECK(r.report->m == r.n);
      CHECK(r.covered == covers(r.report->ci, r.truth));
    }
    if (r.data_kind == DataKind::kDebiasedSynthetic && r.valid()) CHECK(std::isfinite(r.debias_shift));
  }

  auto threaded = config;
  threaded.threads = 3;
  const auto b = run_study(threaded);
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    REQUIRE(a.records[i].valid() == b.records[i].valid());
    if (a.records[i].valid())
      CHECK(std::bit_cast<std::uint64_t>(a.records[i].report->theta) ==
            std::bit_cast<std::uint64_t>(b.records[i].report->theta));
  }

  // Two-pass re-aggregation.
  std::map<CellKey, std::vector<const RunRecord*>> cells;
  for (const auto& r : a.records) cells[{r.n, r.generator, r.data_kind, r.estimand, r.method}].push_back(&r);
  CHECK(cells.size() == a.summary.cells.size());
  for (const auto& [key, rs] : cells) {
    const auto* c = a.summary.find(key);
    REQUIRE(c != nullptr);
    double sum = 0, se = 0, cov = 0, width = 0;
    std::size_t v = 0;
    for (const auto* r : rs) {
      if (!r->valid()) continue;
      ++v;
      sum += r->report->theta;
      se += r->report->selected_se();
      cov += r->covered;
      width += r->report->ci.high - r->report->ci.low;
    }
    CHECK(c->n_valid == v);
    CHECK(c->n_failed == rs.size() - v);
    if (v < 2) continue;
    const double mean = sum / v;
    double ss = 0;
    for (const auto* r : rs)
      if (r->valid()) ss += (r->report->theta - mean) * (r->report->theta - mean);
    CHECK(std::abs(c->mean_estimate - mean) <= 1e-12 * std::max(1.0, std::abs(mean)));
    CHECK(std::abs(c->empirical_se - std::sqrt(ss / (v - 1))) <= 1e-12 * std::max(1.0, mean));
    CHECK(std::abs(c->avg_model_se - se / v) <= 1e-12);
    CHECK(c->coverage == doctest::Approx(cov / v));
    CHECK(c->mean_ci_width == doctest::Approx(width / v).epsilon(1e-12));
    CHECK(c->bias == doctest::Approx(mean - c->truth).epsilon(1e-12));
  }
  CHECK(a.summary.convergence.size() == 6);
}

TEST_CASE("population resampling at full size reproduces the population mean") {
  Rng rng(5);
  auto pop = std::make_shared<const Table>(sample_dgp(300, DgpParams{}, rng));
  StudyConfig c = tiny();
  c.n_grid = {300};
  c.runs = 2;
  c.generators.clear();
  c.methods = {Method::kEic};
  const auto result = population_resample_study(pop, c);
  REQUIRE(result.records.size() == 2);
  double truth = 0.0;
  for (double v : pop->column("age")) truth += v;
  truth /= 300.0;
  for (const auto& r : result.records) {
    CHECK(r.truth == doctest::Approx(truth).epsilon(1e-12));
    REQUIRE(r.valid());
    CHECK(r.report->theta == doctest::Approx(truth).epsilon(1e-12));
  }
  c.n_grid = {301};
  CHECK_THROWS_AS(population_resample_study(pop, c), ValidationError);
}
