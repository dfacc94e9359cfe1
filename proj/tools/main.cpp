#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "synthdebias/config.hpp"
#include "synthdebias/csv.hpp"
#include "synthdebias/debias.hpp"
#include "synthdebias/errors.hpp"
#include "synthdebias/estimators.hpp"
#include "synthdebias/harness.hpp"
#include "synthdebias/inference.hpp"
#include "synthdebias/quality.hpp"
#include "synthdebias/serialize.hpp"

namespace fs = std::filesystem;
using namespace synthdebias;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename F>
void write_stream(const fs::path& path, F&& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  f(out);
  if (!out) throw IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct SimulateArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
};

int simulate(const SimulateArgs& a) {
  StudyConfig cfg = load_study_config(a.config);
  if (a.threads) cfg.threads = *a.threads;
  if (a.seed) cfg.seed = *a.seed;
  if (a.runs) cfg.runs = *a.runs;
  const std::string started = utc_timestamp();
  const auto result = run_study(cfg);
  const fs::path dir = a.out;
  ensure_dir(dir);
  write_stream(dir / "runs.csv", [&](std::ostream& o) { write_runs_csv(o, result.records); });
  write_text(dir / "summary.json", summary_json(result.summary, cfg));
  write_stream(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result.summary); });
  write_stream(dir / "convergence.csv",
               [&](std::ostream& o) { write_convergence_csv(o, result.summary); });
  const std::vector<std::string> files{"runs.csv", "summary.json", "summary.csv",
                                       "convergence.csv"};
  write_text(dir / "manifest.json", manifest_json(cfg, dir, files, started, utc_timestamp()));
  std::size_t failed = 0;
  for (const auto& r : result.records) failed += r.valid() ? 0 : 1;
  std::cerr << result.records.size() << " records (" << failed << " failed) written to "
            << dir.string() << "\n";
  return 0;
}

struct DebiasArgs {
  std::string data, schema, generator, estimand, out = "out";
  std::size_t m = 0;
  std::uint64_t seed = 1;
  std::size_t k_large = 1'000'000;
  std::size_t k_cond = 100'000;
  bool lenient = false;
  bool verify = false;
};

int debias_cmd(const DebiasArgs& a) {
  const Schema schema = load_schema(a.schema);
  const Table data = read_csv(fs::path(a.data), schema);
  const auto gspec = GeneratorSpec::parse(a.generator);
  gspec.validate();
  const auto estimand = EstimandSpec::parse(a.estimand);
  estimand.validate(schema);
  if (a.m < 1) throw ValidationError("--m must be >= 1");

  Rng fit_rng(derive_seed(a.seed, {1}));
  const auto gen = fit_generator(gspec, data, fit_rng);
  Rng sample_rng(derive_seed(a.seed, {2}));
  const Table synthetic = gen->sample(a.m, sample_rng);

  DebiasOptions options;
  options.k_large = a.k_large;
  options.k_cond = a.k_cond;
  options.strict = !a.lenient;
  options.verify = a.verify;
  Rng debias_rng(derive_seed(a.seed, {3}));
  const auto result = debias(gen, data, estimand, options, debias_rng);
  Rng debiased_rng(derive_seed(a.seed, {4}));
  const Table debiased = result.generator->sample(a.m, debiased_rng);

  const fs::path dir = a.out;
  ensure_dir(dir);
  write_csv(dir / "default_synthetic.csv", synthetic);
  write_csv(dir / "debiased_synthetic.csv", debiased);
  write_text(dir / "debias_report.json", debias_report_json(result.report));
  return 0;
}

struct AnalyzeArgs {
  std::string data, schema, estimand, kind = "original", method = "eic";
  std::optional<std::size_t> n;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
};

int analyze(const AnalyzeArgs& a) {
  const Schema schema = load_schema(a.schema);
  const Table data = read_csv(fs::path(a.data), schema);
  const auto estimand = EstimandSpec::parse(a.estimand);
  estimand.validate(schema);
  DataKind kind = DataKind::kOriginal;
  if (a.kind == "default") kind = DataKind::kDefaultSynthetic;
  else if (a.kind == "debiased") kind = DataKind::kDebiasedSynthetic;
  else if (a.kind != "original") throw ValidationError("--kind must be original, default or debiased");
  if (kind != DataKind::kOriginal && !a.n)
    throw ValidationError("--n (original sample size) is required for synthetic data");
  const std::size_t n = a.n.value_or(data.rows());
  if (n < 1) throw ValidationError("--n must be >= 1");
  const Method method = a.method == "mle" ? Method::kMle : Method::kEic;
  Rng rng(a.seed);
  const auto fit = estimate(data, estimand, method, a.folds, rng, true);
  std::cout << estimate_report_json(make_report(fit, estimand, kind, n), &fit);
  return 0;
}

struct QualityArgs {
  std::string original, synthetic, schema;
  std::size_t bins = 10;
};

int quality(const QualityArgs& a) {
  const Schema schema = load_schema(a.schema);
  const Table original = read_csv(fs::path(a.original), schema);
  const Table synthetic = read_csv(fs::path(a.synthetic), schema);
  std::cout << quality_report_json(assess_quality(original, synthetic, a.bins));
  return 0;
}

int convergence(const std::string& summary) {
  std::ifstream in(summary);
  if (!in) throw IoError("cannot open " + summary);
  std::cout << power_law_json(convergence_from_summary_csv(in));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Debiased inference from synthetic tabular data"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a Monte Carlo study from a config file");
  s->add_option("--config", sim.config, "Study config (YAML)")->required();
  s->add_option("--out", sim.out, "Output directory");
  s->add_option("--threads", sim.threads, "Worker threads (results do not depend on it)");
  s->add_option("--seed", sim.seed, "Override study.seed");
  s->add_option("--runs", sim.runs, "Override study.runs");

  DebiasArgs deb;
  auto* d = app.add_subcommand("debias", "Fit a generator and write default and debiased samples");
  d->add_option("--data", deb.data, "Original data CSV")->required();
  d->add_option("--schema", deb.schema, "Schema file")->required();
  d->add_option("--generator", deb.generator, "Generator spec")->required();
  d->add_option("--estimand", deb.estimand, "Estimand spec")->required();
  d->add_option("--m", deb.m, "Synthetic rows")->required();
  d->add_option("--out", deb.out, "Output directory");
  d->add_option("--seed", deb.seed, "Seed");
  d->add_option("--k-large", deb.k_large, "Plug-in sample size");
  d->add_option("--k-cond", deb.k_cond, "Conditional sample size per stratum");
  d->add_flag("--lenient", deb.lenient, "Fall back to marginal means for unreachable strata");
  d->add_flag("--verify", deb.verify, "Recompute the residual bias after the shift");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Estimate with standard errors and a 95% CI");
  a->add_option("--data", an.data, "Data CSV")->required();
  a->add_option("--schema", an.schema, "Schema file")->required();
  a->add_option("--estimand", an.estimand, "Estimand spec")->required();
  a->add_option("--kind", an.kind, "original, default or debiased");
  a->add_option("--n", an.n, "Original sample size (synthetic kinds)");
  a->add_option("--method", an.method, "SE behind the interval")
      ->check(CLI::IsMember({"eic", "mle"}));
  a->add_option("--folds", an.folds, "Nuisance cross-fitting folds for EIC");
  a->add_option("--seed", an.seed, "Seed for fold assignment");

  QualityArgs q;
  auto* qc = app.add_subcommand("quality", "IKLD score and exact-copy count");
  qc->add_option("--original", q.original, "Original CSV")->required();
  qc->add_option("--synthetic", q.synthetic, "Synthetic CSV")->required();
  qc->add_option("--schema", q.schema, "Schema file")->required();
  qc->add_option("--bins", q.bins, "Bins for continuous columns");

  std::string summary;
  auto* c = app.add_subcommand("convergence", "Power-law exponent of empirical SE over n");
  c->add_option("--summary", summary, "CSV with columns n and empirical_se")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return simulate(sim);
    if (*d) return debias_cmd(deb);
    if (*a) return analyze(an);
    if (*qc) return quality(q);
    if (*c) return convergence(summary);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
