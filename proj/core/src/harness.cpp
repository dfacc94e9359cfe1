#include "synthdebias/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "synthdebias/errors.hpp"

namespace synthdebias {

namespace {

// Phase tags for seed derivation. New phases take new tags.
enum Phase : std::uint64_t {
  kPhaseData = 1,
  kPhaseFit = 2,
  kPhaseDefaultSample = 3,
  kPhaseDebias = 4,
  kPhaseDebiasSample = 5,
  kPhaseEstimate = 6,
};

Table subsample(const Table& population, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(population.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
  idx.resize(n);
  return population.select_rows(idx);
}

struct Context {
  const StudyConfig& config;
  std::vector<double> truths;      // per estimand
  std::vector<std::string> labels; // per estimand
  std::vector<std::string> generator_labels;
};

class RunBuilder {
 public:
  RunBuilder(const Context& ctx, std::size_t n, std::size_t run) : ctx_(ctx), n_(n), run_(run) {}

  std::uint64_t seed(std::uint64_t gen, Phase phase, std::uint64_t a = 0, std::uint64_t b = 0) const {
    return derive_seed(ctx_.config.seed, {n_, run_, gen, phase, a, b});
  }

  RunRecord base(const std::string& generator, DataKind kind, std::size_t e, Method method) const {
    RunRecord r;
    r.n = n_;
    r.generator = generator;
    r.data_kind = kind;
    r.estimand = ctx_.labels[e];
    r.method = method;
    r.run = run_;
    r.truth = ctx_.truths[e];
    return r;
  }

  void analyze(const Table& data, const std::string& generator, std::uint64_t gen_index,
               DataKind kind, std::size_t e, const DebiasReport* debias) {
    const auto& spec = ctx_.config.estimands[e].spec;
    for (Method method : ctx_.config.methods) {
      RunRecord r = base(generator, kind, e, method);
      if (debias) {
        r.debias_shift = spec.type == EstimandSpec::Type::kRiskDifference
                             ? debias->arm_deltas[1] - debias->arm_deltas[0]
                             : debias->shift;
        r.debias_residual = debias->residual_after_shift;
      }
      try {
        Rng rng(seed(gen_index, kPhaseEstimate, static_cast<std::uint64_t>(kind) * 64 + e,
                     static_cast<std::uint64_t>(method)));
        const auto fit = estimate(data, spec, method, ctx_.config.nuisance_folds, rng, true);
        auto report = make_report(fit, spec, kind, n_, ctx_.config.level);
        const double se = report.selected_se();
        if (!se_in_range(se)) {
          r.failure = Failure::kNonEstimable;
          r.message = "standard error out of range: " + std::to_string(se);
        } else {
          r.covered = covers(report.ci, r.truth);
          r.report = std::move(report);
        }
      } catch (const Error& err) {
        r.failure = Failure::kNonEstimable;
        r.message = err.what();
      }
      out_.push_back(std::move(r));
    }
  }

  void fail_all(const std::string& generator, DataKind kind, std::size_t e, Failure failure,
                const std::string& message) {
    for (Method method : ctx_.config.methods) {
      RunRecord r = base(generator, kind, e, method);
      r.failure = failure;
      r.message = message;
      out_.push_back(std::move(r));
    }
  }

  std::vector<RunRecord> build() {
    const auto& cfg = ctx_.config;
    Table original;
    {
      Rng rng(seed(0, kPhaseData));
      original = cfg.population ? subsample(*cfg.population, n_, rng) : sample_dgp(n_, cfg.dgp, rng);
    }
    for (std::size_t e = 0; e < cfg.estimands.size(); ++e)
      analyze(original, "-", 0, DataKind::kOriginal, e, nullptr);

    const std::size_t m = cfg.m_rule.m_for(n_);
    for (std::size_t g = 0; g < cfg.generators.size(); ++g) {
      const std::uint64_t gi = g + 1;
      const auto& label = ctx_.generator_labels[g];
      GeneratorPtr gen;
      try {
        Rng rng(seed(gi, kPhaseFit));
        gen = fit_generator(cfg.generators[g], original, rng);
      } catch (const Error& err) {
        for (std::size_t e = 0; e < cfg.estimands.size(); ++e) {
          fail_all(label, DataKind::kDefaultSynthetic, e, Failure::kGeneratorFailed, err.what());
          if (cfg.estimands[e].debias)
            fail_all(label, DataKind::kDebiasedSynthetic, e, Failure::kGeneratorFailed, err.what());
        }
        continue;
      }
      Table synthetic;
      {
        Rng rng(seed(gi, kPhaseDefaultSample));
        synthetic = gen->sample(m, rng);
      }
      for (std::size_t e = 0; e < cfg.estimands.size(); ++e) {
        analyze(synthetic, label, gi, DataKind::kDefaultSynthetic, e, nullptr);
        if (!cfg.estimands[e].debias) continue;
        DebiasResult debiased;
        try {
          Rng rng(seed(gi, kPhaseDebias, e));
          debiased = cfg.debias.split_folds > 1
                         ? debias_split(cfg.generators[g], gen, original, cfg.estimands[e].spec,
                                        cfg.debias, rng)
                         : debias(gen, original, cfg.estimands[e].spec, cfg.debias, rng);
        } catch (const Error& err) {
          fail_all(label, DataKind::kDebiasedSynthetic, e, Failure::kDebiasFailed, err.what());
          continue;
        }
        Table sample;
        try {
          Rng rng(seed(gi, kPhaseDebiasSample, e));
          sample = debiased.generator->sample(m, rng);
        } catch (const Error& err) {
          fail_all(label, DataKind::kDebiasedSynthetic, e, Failure::kDebiasFailed, err.what());
          continue;
        }
        analyze(sample, label, gi, DataKind::kDebiasedSynthetic, e, &debiased.report);
      }
    }
    return std::move(out_);
  }

 private:
  const Context& ctx_;
  std::size_t n_;
  std::size_t run_;
  std::vector<RunRecord> out_;
};

double population_truth(const Table& population, const EstimandSpec& spec) {
  Rng unused(0);
  return estimate(population, spec, Method::kMle, 1, unused, false).theta;
}

}  // namespace

const char* failure_name(Failure failure) {
  switch (failure) {
    case Failure::kNone: return "";
    case Failure::kGeneratorFailed: return "GeneratorFailed";
    case Failure::kDebiasFailed: return "DebiasFailed";
    case Failure::kNonEstimable: return "NonEstimable";
  }
  return "?";
}

void StudyConfig::validate() const {
  if (n_grid.empty()) throw ValidationError("n_grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw ValidationError("n_grid entries must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw ValidationError("n_grid must be strictly increasing");
  }
  if (runs < 2) throw ValidationError("runs must be >= 2");
  if (m_rule.kind == MRule::Kind::kFixed && m_rule.fixed < 2)
    throw ValidationError("fixed m must be >= 2");
  if (estimands.empty()) throw ValidationError("no estimands configured");
  if (methods.empty()) throw ValidationError("no estimation methods configured");
  if (nuisance_folds < 1) throw ValidationError("nuisance_folds must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must be in (0, 1)");
  for (const auto& g : generators) g.validate();
  const Schema schema = population ? population->schema() : dgp_schema();
  for (const auto& e : estimands) e.spec.validate(schema);
  if (population) {
    if (population->rows() < n_grid.back())
      throw ValidationError("population has " + std::to_string(population->rows()) +
                            " rows, fewer than the largest n " + std::to_string(n_grid.back()));
  } else {
    dgp.validate();
  }
}

double resolve_truth(const StudyConfig& config, const EstimandSpec& estimand) {
  const std::string label = estimand.to_string();
  if (auto it = config.truth.find(label); it != config.truth.end()) return it->second;
  if (config.population) return population_truth(*config.population, estimand);
  const auto tp = true_parameters(config.dgp);
  if (estimand.type == EstimandSpec::Type::kMean && estimand.outcome == "age") return tp.mean_age;
  if (estimand.type == EstimandSpec::Type::kLinCoef && estimand.outcome == "bp" &&
      estimand.exposure == "therapy")
    return tp.therapy_effect;
  throw ValidationError("no truth known for estimand " + label + "; set it under truth");
}

bool record_less(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.n, a.generator, a.data_kind, a.estimand, a.method, a.run) <
         std::tie(b.n, b.generator, b.data_kind, b.estimand, b.method, b.run);
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  Context ctx{config, {}, {}, {}};
  for (const auto& e : config.estimands) {
    ctx.labels.push_back(e.spec.to_string());
    ctx.truths.push_back(resolve_truth(config, e.spec));
  }
  for (const auto& g : config.generators) ctx.generator_labels.push_back(g.label());

  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t n : config.n_grid)
    for (std::size_t r = 0; r < config.runs; ++r) tasks.emplace_back(n, r);

  std::vector<std::vector<RunRecord>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        slots[i] = RunBuilder(ctx, tasks[i].first, tasks[i].second).build();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks.size());
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(tasks.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  StudyResult result;
  for (auto& s : slots)
    for (auto& r : s) result.records.push_back(std::move(r));
  std::sort(result.records.begin(), result.records.end(), record_less);
  result.summary = summarize(result.records);
  return result;
}

StudyResult population_resample_study(std::shared_ptr<const Table> population,
                                      StudyConfig config) {
  if (!population) throw ValidationError("population table missing");
  config.population = std::move(population);
  return run_study(config);
}

const CellSummary* StudySummary::find(const CellKey& key) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), key,
                             [](const CellSummary& c, const CellKey& k) { return c.key < k; });
  return it != cells.end() && it->key == key ? &*it : nullptr;
}

StudySummary summarize(std::span<const RunRecord> records) {
  struct Acc {
    double truth = 0.0;
    std::size_t valid = 0, failed = 0, covered = 0;
    double mean = 0.0, m2 = 0.0, se_sum = 0.0, width_sum = 0.0;
  };
  std::map<CellKey, Acc> acc;
  for (const auto& r : records) {
    auto& a = acc[CellKey{r.n, r.generator, r.data_kind, r.estimand, r.method}];
    a.truth = r.truth;
    if (!r.valid()) {
      ++a.failed;
      continue;
    }
    const auto& rep = *r.report;
    ++a.valid;
    const double d = rep.theta - a.mean;
    a.mean += d / static_cast<double>(a.valid);
    a.m2 += d * (rep.theta - a.mean);
    a.se_sum += rep.selected_se();
    a.width_sum += rep.ci.high - rep.ci.low;
    if (r.covered) ++a.covered;
  }

  StudySummary summary;
  std::map<ConvergenceKey, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& [key, a] : acc) {
    CellSummary c;
    c.key = key;
    c.truth = a.truth;
    c.n_valid = a.valid;
    c.n_failed = a.failed;
    if (a.valid > 0) {
      const double v = static_cast<double>(a.valid);
      c.mean_estimate = a.mean;
      c.bias = a.mean - a.truth;
      c.empirical_se = a.valid > 1 ? std::sqrt(a.m2 / (v - 1.0)) : 0.0;
      c.avg_model_se = a.se_sum / v;
      c.coverage = static_cast<double>(a.covered) / v;
      c.mean_ci_width = a.width_sum / v;
    } else {
      c.mean_estimate = c.bias = c.empirical_se = c.avg_model_se = c.coverage = c.mean_ci_width =
          std::numeric_limits<double>::quiet_NaN();
    }
    summary.cells.push_back(c);
    if (a.valid > 1 && c.empirical_se > 0.0) {
      auto& s = series[ConvergenceKey{key.generator, key.data_kind, key.estimand, key.method}];
      s.first.push_back(static_cast<double>(key.n));
      s.second.push_back(c.empirical_se);
    }
  }
  for (const auto& [key, s] : series)
    if (s.first.size() >= 3) summary.convergence[key] = fit_power_law(s.first, s.second);
  return summary;
}

double type1_error(std::span<const RunRecord> records, double null_value) {
  std::size_t valid = 0, rejected = 0;
  for (const auto& r : records) {
    if (!r.valid()) continue;
    ++valid;
    if (!covers(r.report->ci, null_value)) ++rejected;
  }
  if (valid == 0) throw DomainError("type1_error: no valid runs");
  return static_cast<double>(rejected) / static_cast<double>(valid);
}

}  // namespace synthdebias
