#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "synthdebias/estimand.hpp"
#include "synthdebias/estimators.hpp"
#include "synthdebias/generators.hpp"

namespace synthdebias {

struct DebiasOptions {
  std::size_t k_large = 1'000'000;
  std::size_t k_cond = 100'000;
  // Unseen or unreachable strata: strict raises, lenient falls back to the
  // marginal mean of the calibration sample and warns.
  bool strict = true;
  // Recompute the residual bias against the shifted generator on an
  // independent stream. Costs about as much as the calibration itself.
  bool verify = true;
  // Sample-split debiasing when > 1: refit on each fold's complement, estimate
  // the bias on the held-out fold and average. Needs debias_split.
  std::size_t split_folds = 0;
};

struct DebiasReport {
  EstimandSpec estimand;
  double theta_hat_pn = 0.0;  // plug-in under the generator
  double shift = 0.0;         // delta (mean) or b (lincoef); unused for rd
  std::vector<double> arm_theta;   // rd: per-arm plug-in means
  std::vector<double> arm_deltas;  // rd: per-arm shifts
  std::size_t k_large = 0;
  std::size_t k_cond = 0;
  double residual_after_shift = std::numeric_limits<double>::quiet_NaN();
  bool relaxed_binary = false;  // a binary column was shifted to non-{0,1}
  std::size_t split_folds = 0;
  std::vector<std::string> warnings;
};

struct DebiasResult {
  GeneratorPtr generator;
  DebiasReport report;
};

// Plug-in estimand on a fresh k_large sample. For lincoef the exposure and
// outcome residuals use `means` when given, else stratum means of the sample.
double theta_under_generator(const FittedGenerator& gen, const EstimandSpec& estimand,
                             std::size_t k_large, Rng& rng,
                             const StratumMap* means = nullptr);

// b = sum (A - E(A|X))(Y - E(Y|X)) / sum (A - E(A|X))^2 - theta_pn over the
// rows of `original`, with the conditional means taken from `means`.
double regression_bias(const Table& original, const EstimandSpec& spec, const StratumMap& means,
                       double theta_pn);

DebiasResult debias_mean(const GeneratorPtr& gen, const Table& original,
                         const std::string& column, const DebiasOptions& options, Rng& rng);

DebiasResult debias_regression(const GeneratorPtr& gen, const Table& original,
                               const EstimandSpec& spec, const DebiasOptions& options, Rng& rng);

// Per-arm plug-in means come from one unconditional k_large sample split by
// arm, which is rejection sampling on arm=g with every draw kept.
DebiasResult debias_mean_per_arm(const GeneratorPtr& gen, const Table& original,
                                 const std::string& outcome, const std::string& arm,
                                 const DebiasOptions& options, Rng& rng);

// Dispatch: mean -> debias_mean, lincoef -> debias_regression,
// rd -> debias_mean_per_arm.
DebiasResult debias(const GeneratorPtr& gen, const Table& original, const EstimandSpec& estimand,
                    const DebiasOptions& options, Rng& rng);

// Sample-split variant. `gen` is the generator fitted on all of `original`
// and is the one wrapped; fold generators are refitted from `spec`.
DebiasResult debias_split(const GeneratorSpec& spec, const GeneratorPtr& gen,
                          const Table& original, const EstimandSpec& estimand,
                          const DebiasOptions& options, Rng& rng);

}  // namespace synthdebias
