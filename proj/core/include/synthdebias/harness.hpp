#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthdebias/debias.hpp"
#include "synthdebias/dgp.hpp"
#include "synthdebias/estimand.hpp"
#include "synthdebias/estimators.hpp"
#include "synthdebias/generators.hpp"
#include "synthdebias/inference.hpp"
#include "synthdebias/table.hpp"

namespace synthdebias {

struct MRule {
  enum class Kind { kEqualToN, kFixed };
  Kind kind = Kind::kEqualToN;
  std::size_t fixed = 0;

  std::size_t m_for(std::size_t n) const { return kind == Kind::kFixed ? fixed : n; }
};

struct EstimandConfig {
  EstimandSpec spec;
  bool debias = true;
};

struct StudyConfig {
  std::uint64_t seed = 20240101;
  std::vector<std::size_t> n_grid{50, 160, 500, 1600, 5000};
  std::size_t runs = 250;
  MRule m_rule;
  std::vector<GeneratorSpec> generators;
  std::vector<EstimandConfig> estimands;
  std::size_t nuisance_folds = 5;
  std::vector<Method> methods{Method::kMle, Method::kEic};
  DebiasOptions debias{.k_large = 1'000'000, .k_cond = 100'000, .strict = true, .verify = false};
  double level = 0.95;

  // Data source: the DGP unless a population is set.
  DgpParams dgp;
  std::shared_ptr<const Table> population;
  // Truth per estimand string; missing entries come from the DGP parameters
  // (mean:age, lincoef:bp~therapy|...) or the population plug-in.
  std::map<std::string, double> truth;

  // 0 uses the hardware concurrency. Never affects results.
  std::size_t threads = 0;

  void validate() const;
};

enum class Failure { kNone, kGeneratorFailed, kDebiasFailed, kNonEstimable };
const char* failure_name(Failure failure);

struct RunRecord {
  std::size_t n = 0;
  std::string generator;  // "-" for the original data
  DataKind data_kind = DataKind::kOriginal;
  std::string estimand;
  Method method = Method::kEic;
  std::size_t run = 0;
  double truth = 0.0;

  std::optional<EstimateReport> report;
  bool covered = false;
  Failure failure = Failure::kNone;
  std::string message;

  // Debiased rows only: the applied shift (delta or b; rd: delta1 - delta0).
  double debias_shift = std::numeric_limits<double>::quiet_NaN();
  double debias_residual = std::numeric_limits<double>::quiet_NaN();

  bool valid() const { return failure == Failure::kNone; }
};

// Order by (n, generator, data_kind, estimand, method, run).
bool record_less(const RunRecord& a, const RunRecord& b);

struct CellKey {
  std::size_t n = 0;
  std::string generator;
  DataKind data_kind = DataKind::kOriginal;
  std::string estimand;
  Method method = Method::kEic;

  auto operator<=>(const CellKey&) const = default;
};

struct CellSummary {
  CellKey key;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double empirical_se = 0.0;  // SD of estimates, n-1 denominator
  double avg_model_se = 0.0;
  double coverage = 0.0;
  double mean_ci_width = 0.0;
  std::size_t n_valid = 0;
  std::size_t n_failed = 0;
};

struct PowerLawFit {
  double a = 0.0;
  double a_low = 0.0;
  double a_high = 0.0;
  double log_c = 0.0;
  std::size_t points = 0;
};

struct ConvergenceKey {
  std::string generator;
  DataKind data_kind = DataKind::kOriginal;
  std::string estimand;
  Method method = Method::kEic;

  auto operator<=>(const ConvergenceKey&) const = default;
};

struct StudySummary {
  std::vector<CellSummary> cells;  // sorted by key
  std::map<ConvergenceKey, PowerLawFit> convergence;

  const CellSummary* find(const CellKey& key) const;
};

struct StudyResult {
  std::vector<RunRecord> records;  // sorted by record_less
  StudySummary summary;
};

StudyResult run_study(const StudyConfig& config);

// Original samples are drawn without replacement from the population; truth
// defaults to the plug-in estimand on the whole population.
StudyResult population_resample_study(std::shared_ptr<const Table> population,
                                      StudyConfig config);

// Streaming (Welford) aggregation of valid records per cell, followed by
// power-law fits over n for every series with at least three positive SEs.
StudySummary summarize(std::span<const RunRecord> records);

// OLS of log(se) on log(n); a is minus the slope, with a t interval on
// points - 2 degrees of freedom.
PowerLawFit fit_power_law(std::span<const double> n_values, std::span<const double> ses,
                          double level = 0.95);

// Fraction of valid records whose interval excludes null_value.
double type1_error(std::span<const RunRecord> records, double null_value);

// Truth for an estimand under the configured source.
double resolve_truth(const StudyConfig& config, const EstimandSpec& estimand);

}  // namespace synthdebias
