#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthdebias/estimand.hpp"
#include "synthdebias/random.hpp"
#include "synthdebias/strata.hpp"
#include "synthdebias/table.hpp"

namespace synthdebias {

enum class Method { kMle, kEic };
const char* method_name(Method method);

struct ArmSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance, m-1 denominator
};

struct EstimatorFit {
  double theta = 0.0;
  // Plug-in influence-curve values, one per row used.
  std::vector<double> eic;
  std::size_t n_used = 0;
  Method method = Method::kEic;

  // Linear coefficient diagnostics.
  double denominator = 0.0;       // mean of squared exposure residuals
  double residual_ss = 0.0;       // sum of squared outcome residuals after the fit
  std::size_t residual_df = 0;    // rows - strata - 1 (k = 1 only)
  std::size_t dropped_rows = 0;   // rows in strata the nuisance could not predict

  // Risk difference diagnostics, indexed by arm level (0, 1).
  std::vector<ArmSummary> arms;
  bool binary_outcome = false;
};

struct StratumMeans {
  double mean_a = 0.0;
  double mean_y = 0.0;
  std::size_t count = 0;
};

using StratumMap = std::map<StratumKey, StratumMeans>;

// Stratum-mean nuisance E(A|X), E(Y|X) with optional k-fold cross-fitting.
struct NuisanceModel {
  StratumKeyer keyer;
  std::size_t folds = 1;
  StratumMap strata;                 // estimated on every row
  std::vector<std::size_t> fold_of;  // per row; empty when folds == 1
  std::vector<StratumMap> per_fold;  // per_fold[f]: estimated on rows outside fold f

  // Per-row out-of-fold predictions; nullopt where the stratum is unseen.
  std::vector<std::optional<std::pair<double, double>>> predictions;
};

EstimatorFit estimate_mean(const Table& table, const std::string& column);

// Throws StratumUnestimable when a row's stratum is absent from its training
// folds, unless drop_unestimable is set (the row then has no prediction).
NuisanceModel fit_nuisance(const Table& table, const std::string& outcome,
                           const std::string& exposure, const std::vector<std::string>& covariates,
                           std::size_t folds, Rng& rng, bool drop_unestimable = false);

// Partialling-out ratio with nuisance predictions; rows without a prediction
// are dropped and counted. Throws DegenerateExposure when the mean squared
// exposure residual is below 1e-12.
EstimatorFit estimate_lincoef(const Table& table, const NuisanceModel& nuisance,
                              const EstimandSpec& spec);

// Same ratio with externally supplied stratum means (e.g. generator-based).
EstimatorFit estimate_lincoef(const Table& table, const EstimandSpec& spec,
                              const StratumMap& means, bool drop_unestimable = false);

EstimatorFit estimate_risk_difference(const Table& table, const std::string& outcome,
                                      const std::string& arm);

// Dispatch on the estimand. For kLinCoef the MLE path always uses k = 1
// stratum means (the dummy-variable OLS coefficient); the EIC path uses
// `folds`.
EstimatorFit estimate(const Table& table, const EstimandSpec& spec, Method method,
                      std::size_t folds, Rng& rng, bool drop_unestimable = true);

// -(1/m) * sum of the fit's influence values.
double bias_term_synthetic_plugin(const EstimatorFit& fit);

}  // namespace synthdebias
