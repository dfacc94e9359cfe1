// Acceptance suite: one PASS/FAIL line per criterion. Arguments select
// criteria by number; no arguments runs all of them.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "synthdebias/config.hpp"
#include "synthdebias/csv.hpp"
#include "synthdebias/debias.hpp"
#include "synthdebias/dgp.hpp"
#include "synthdebias/estimators.hpp"
#include "synthdebias/generators.hpp"
#include "synthdebias/harness.hpp"
#include "synthdebias/inference.hpp"

using namespace synthdebias;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

double sd(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Solves the normal equations of y on [a, dummies] by Gauss-Jordan with
// partial pivoting; returns the coefficient of a.
double ols_dummy_coefficient(const std::vector<double>& a, const std::vector<double>& y,
                             const std::vector<std::size_t>& stratum, std::size_t strata) {
  const std::size_t p = strata + 1;
  std::vector<std::vector<double>> m(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<double> x(p, 0.0);
    x[0] = a[i];
    x[1 + stratum[i]] = 1.0;
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) m[r][c] += x[r] * x[c];
      m[r][p] += x[r] * y[i];
    }
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= p; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return m[0][p] / m[0][0];
}

Outcome criterion1() {
  Rng rng(101);
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t strata = 1 + rng.index(4);
    const std::size_t n = 2 * strata + 2 + rng.index(200 - 2 * strata - 1);
    std::vector<std::string> levels;
    for (std::size_t k = 0; k < strata; ++k) levels.push_back("s" + std::to_string(k));
    std::vector<double> x(n), a(n), y(n);
    std::vector<std::size_t> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = i < strata ? i : rng.index(strata);  // every stratum present
      x[i] = static_cast<double>(xs[i]);
    }
    // Two rows per stratum with distinct exposures keep the design full rank.
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal(0.3 * x[i], 1.0);
      y[i] = rng.normal(2.0 - 1.5 * a[i] + x[i], 2.0);
    }
    const Schema schema({{"x", ColumnKind::categorical(levels)},
                         {"a", ColumnKind::continuous()},
                         {"y", ColumnKind::continuous()}});
    const Table t(schema, {x, a, y});
    const auto spec = EstimandSpec::lincoef("y", "a", {"x"});
    Rng fold_rng(1);
    const auto nuisance = fit_nuisance(t, "y", "a", {"x"}, 1, fold_rng);
    const double got = estimate_lincoef(t, nuisance, spec).theta;
    const double want = ols_dummy_coefficient(a, y, xs, strata);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  return {worst <= 1e-10, "max relative difference " + fmt(worst, 3) + " over 1000 instances"};
}

Outcome criterion2() {
  const auto spec = EstimandSpec::parse("lincoef:bp~therapy|stage");
  Rng data_rng(202);
  const Table original = sample_dgp(500, DgpParams{}, data_rng);
  DebiasOptions options;
  options.k_large = 200'000;
  options.k_cond = 20'000;
  options.verify = true;
  bool pass = true;
  std::string detail;
  for (const char* g : {"parametric", "smoothed_bootstrap:bandwidth=3", "gaussian_copula"}) {
    Rng fit_rng(203);
    const auto gen = fit_generator(GeneratorSpec::parse(g), original, fit_rng);
    std::vector<double> bs;
    double residual = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      Rng rng(derive_seed(204, {s}));
      auto opts = options;
      opts.verify = s == 0;
      const auto r = debias_regression(gen, original, spec, opts, rng);
      bs.push_back(r.report.shift);
      if (s == 0) residual = r.report.residual_after_shift;
    }
    const double se_b = sd(bs);
    const bool ok = std::abs(residual) <= 5.0 * se_b;
    pass = pass && ok;
    detail += std::string(g) + ": |b'|=" + fmt(std::abs(residual)) + " 5*SE_b=" + fmt(5 * se_b) + "; ";
  }
  return {pass, detail};
}

Outcome criterion3() {
  Rng data_rng(303);
  const Table original = sample_dgp(500, DgpParams{}, data_rng);
  const double target = column_mean(original, "age");
  bool pass = true;
  std::string detail;
  for (const char* g : {"parametric", "smoothed_bootstrap:bandwidth=3", "gaussian_copula"}) {
    Rng rng(304);
    const auto gen = fit_generator(GeneratorSpec::parse(g), original, rng);
    DebiasOptions options;
    options.verify = false;
    const auto r = debias_mean(gen, original, "age", options, rng);
    Rng fresh(305);
    const Table t = r.generator->sample(1'000'000, fresh);
    const auto col = t.column("age");
    std::vector<double> v(col.begin(), col.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    const double tol = 5.0 * sd(v) / std::sqrt(1e6);
    const bool ok = std::abs(mean - target) <= tol;
    pass = pass && ok;
    detail += std::string(g) + ": |diff|=" + fmt(std::abs(mean - target)) + " tol=" + fmt(tol) + "; ";
  }
  return {pass, detail};
}

StudyConfig base_config(std::uint64_t seed, const char* generator, const char* estimand) {
  StudyConfig cfg;
  cfg.seed = seed;
  cfg.generators = {GeneratorSpec::parse(generator)};
  cfg.estimands = {{EstimandSpec::parse(estimand), true}};
  cfg.methods = {Method::kEic};
  cfg.threads = 0;
  return cfg;
}

template <typename T>
double cell(const StudyResult& r, std::size_t n, const std::string& gen, DataKind kind,
            const std::string& estimand, T CellSummary::*field) {
  const auto* c = r.summary.find({n, gen, kind, estimand, Method::kEic});
  if (!c) throw std::runtime_error("missing cell");
  return static_cast<double>(c->*field);
}

Outcome criterion4() {
  auto cfg = base_config(404, "smoothed_bootstrap:bandwidth=3,centres=0.5", "mean:age");
  cfg.n_grid = {50, 160, 500};
  cfg.runs = 250;
  const auto r = run_study(cfg);
  const std::string g = cfg.generators[0].label();
  bool pass = true;
  std::string detail = "debiased coverage";
  for (std::size_t n : cfg.n_grid) {
    const double c = cell(r, n, g, DataKind::kDebiasedSynthetic, "mean:age", &CellSummary::coverage);
    pass = pass && std::abs(c - 0.95) <= 0.04;
    detail += " n=" + std::to_string(n) + ":" + fmt(c, 3);
  }
  const double d50 = cell(r, 50, g, DataKind::kDefaultSynthetic, "mean:age", &CellSummary::coverage);
  const double d500 = cell(r, 500, g, DataKind::kDefaultSynthetic, "mean:age", &CellSummary::coverage);
  pass = pass && d500 <= d50 - 0.05;
  detail += "; default coverage n=50:" + fmt(d50, 3) + " n=500:" + fmt(d500, 3);
  return {pass, detail};
}

Outcome criterion5() {
  auto cfg = base_config(505, "smoothed_bootstrap:bandwidth=3,centres=0.5", "mean:age");
  cfg.n_grid = {50, 160, 500, 1600, 5000};
  cfg.runs = 100;
  const auto r = run_study(cfg);
  const std::string g = cfg.generators[0].label();
  auto exponent = [&](DataKind kind) {
    std::vector<double> ns, ses;
    for (std::size_t n : cfg.n_grid) {
      ns.push_back(static_cast<double>(n));
      ses.push_back(cell(r, n, g, kind, "mean:age", &CellSummary::empirical_se));
    }
    return fit_power_law(ns, ses);
  };
  const auto deb = exponent(DataKind::kDebiasedSynthetic);
  const auto def = exponent(DataKind::kDefaultSynthetic);
  const bool pass = deb.a >= 0.40 && deb.a <= 0.60 && def.a <= deb.a - 0.15;
  return {pass, "debiased a=" + fmt(deb.a, 3) + " [" + fmt(deb.a_low, 3) + ";" + fmt(deb.a_high, 3) +
                    "], default a=" + fmt(def.a, 3) + " [" + fmt(def.a_low, 3) + ";" +
                    fmt(def.a_high, 3) + "]"};
}

Outcome criterion6() {
  auto cfg = base_config(606, "parametric", "mean:age");
  cfg.n_grid = {500};
  cfg.runs = 500;
  const auto r = run_study(cfg);
  const double emp = cell(r, 500, "parametric", DataKind::kDebiasedSynthetic, "mean:age",
                          &CellSummary::empirical_se);
  const double ratio = emp / (std::sqrt(1.0 / 500 + 1.0 / 500) * 10.0);
  return {ratio >= 0.85 && ratio <= 1.15, "SD ratio " + fmt(ratio)};
}

Outcome criterion7() {
  auto cfg = base_config(707, "smoothed_bootstrap:bandwidth=3,centres=0.5",
                         "lincoef:bp~therapy|stage");
  cfg.n_grid = {160, 500};
  cfg.runs = 250;
  cfg.debias.k_large = 200'000;
  cfg.debias.k_cond = 20'000;
  const auto r = run_study(cfg);
  const std::string g = cfg.generators[0].label();
  const std::string e = "lincoef:bp~therapy|stage";
  bool pass = true;
  std::string detail;
  for (std::size_t n : cfg.n_grid) {
    const double deb = cell(r, n, g, DataKind::kDebiasedSynthetic, e, &CellSummary::coverage);
    const double def = cell(r, n, g, DataKind::kDefaultSynthetic, e, &CellSummary::coverage);
    const double failed = cell(r, n, g, DataKind::kDebiasedSynthetic, e, &CellSummary::n_failed);
    pass = pass && deb >= def + 0.05 && deb >= 0.85;
    detail += "n=" + std::to_string(n) + " debiased " + fmt(deb, 3) + " default " + fmt(def, 3) +
              " (debias failures " + fmt(failed, 3) + "); ";
  }
  return {pass, detail};
}

Outcome criterion8() {
  auto cfg = base_config(808, "parametric", "mean:age");
  cfg.n_grid = {500};
  cfg.runs = 100;
  cfg.m_rule = {MRule::Kind::kFixed, 1'000'000};
  const auto r = run_study(cfg);
  const double deb = cell(r, 500, "parametric", DataKind::kDebiasedSynthetic, "mean:age",
                          &CellSummary::mean_ci_width);
  const double orig = cell(r, 500, "-", DataKind::kOriginal, "mean:age", &CellSummary::mean_ci_width);
  const double ratio = deb / orig;
  return {ratio >= 0.95 && ratio <= 1.10, "CI width ratio " + fmt(ratio)};
}

Outcome criterion9(const fs::path& data_dir) {
  const Schema schema = load_schema(data_dir / "population.schema.yaml");
  auto population = std::make_shared<const Table>(read_csv(data_dir / "population.csv", schema));
  auto cfg = base_config(909, "smoothed_bootstrap:bandwidth=3,centres=0.5", "rd:death~aspirin");
  cfg.n_grid = {500};
  cfg.runs = 100;
  const auto r = population_resample_study(population, cfg);
  const double truth = resolve_truth(StudyConfig{.population = population}, cfg.estimands[0].spec);
  auto t1 = [&](DataKind kind) {
    std::vector<RunRecord> rows;
    for (const auto& rec : r.records)
      if (rec.data_kind == kind && rec.generator == cfg.generators[0].label()) rows.push_back(rec);
    return type1_error(rows, truth);
  };
  const double deb = t1(DataKind::kDebiasedSynthetic);
  const double def = t1(DataKind::kDefaultSynthetic);
  return {deb <= 0.10 && def >= deb + 0.05,
          "true RD " + fmt(truth) + "; type-1 error debiased " + fmt(deb, 3) + " default " + fmt(def, 3)};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10(const fs::path& cli, const fs::path& work) {
  fs::create_directories(work);
  const fs::path cfg = work / "determinism.cfg";
  std::ofstream(cfg) << "study:\n  seed: 1010\n  n_grid: [50, 160]\n  runs: 6\n"
                        "debias: {k_large: 50000, k_cond: 5000}\n"
                        "generators: [parametric, \"smoothed_bootstrap:bandwidth=3\", gaussian_copula]\n"
                        "estimands: [mean:age, \"lincoef:bp~therapy|stage\"]\n";
  std::string bytes[2];
  int idx = 0;
  for (int threads : {1, 8}) {
    const fs::path out = work / ("threads" + std::to_string(threads));
    const std::string cmd = "\"" + cli.string() + "\" simulate --config \"" + cfg.string() +
                            "\" --out \"" + out.string() + "\" --threads " +
                            std::to_string(threads) + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "simulate failed: " + cmd};
    // Rows are already written in cell-key order; sorting again is a no-op guard.
    std::istringstream in(read_all(out / "runs.csv"));
    std::string header, line;
    std::getline(in, header);
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    std::vector<std::string> sorted = rows;
    std::sort(sorted.begin(), sorted.end());
    std::string joined = header + "\n";
    for (const auto& row : sorted) joined += row + "\n";
    bytes[idx++] = joined;
  }
  const bool same = bytes[0] == bytes[1] && !bytes[0].empty();
  return {same, same ? "runs.csv identical (" + std::to_string(bytes[0].size()) + " bytes)"
                     : "runs.csv differs between --threads 1 and 8"};
}

Outcome criterion11() {
  const std::vector<double> ns{50, 160, 500, 1600, 5000};
  std::vector<double> ses;
  for (double n : ns) ses.push_back(3.7 * std::pow(n, -0.5));
  const auto fit = fit_power_law(ns, ses);
  return {std::abs(fit.a - 0.5) <= 1e-12, "a=" + fmt(fit.a, 17)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path data_dir = SYNTHDEBIAS_DATA_DIR;
  const fs::path cli = SYNTHDEBIAS_CLI;
  const fs::path work = fs::temp_directory_path() / "synthdebias_acceptance";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 estimator oracle equivalence", criterion1},
      {"2 residual bias after regression shift", criterion2},
      {"3 mean-debias exactness", criterion3},
      {"4 coverage restoration (mean)", criterion4},
      {"5 convergence exponent", criterion5},
      {"6 variance formula", criterion6},
      {"7 regression coverage", criterion7},
      {"8 m >> n interval width", criterion8},
      {"9 type-1 error", [&] { return criterion9(data_dir); }},
      {"10 determinism across threads", [&] { return criterion10(cli, work); }},
      {"11 power-law unit check", criterion11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(static_cast<int>(i + 1))) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << criteria[i].first << ": "
              << o.detail << " (" << fmt(secs, 3) << " s)" << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
