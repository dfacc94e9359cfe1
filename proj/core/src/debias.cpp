#include "synthdebias/debias.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "synthdebias/errors.hpp"

namespace synthdebias {

namespace {

void check_options(const DebiasOptions& options) {
  if (options.k_large < 2) throw ValidationError("k_large must be at least 2");
  if (options.k_cond < 2) throw ValidationError("k_cond must be at least 2");
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct RegressionCalibration {
  StratumMap means;
  double theta_pn = 0.0;
  double fallback_a = 0.0;
  std::vector<std::string> warnings;
};

// Conditional means per observed stratum from k_cond conditional draws, then
// the plug-in coefficient on a k_large sample with the same map. Strata that
// only appear in the large sample take that sample's stratum means.
RegressionCalibration calibrate_regression(const FittedGenerator& gen, const Table& original,
                                           const EstimandSpec& spec,
                                           const DebiasOptions& options, Rng& rng) {
  const StratumKeyer keyer(original.schema(), spec.covariates);
  const auto original_keys = keyer.keys(original);
  const std::set<StratumKey> observed(original_keys.begin(), original_keys.end());

  RegressionCalibration cal;
  std::vector<StratumKey> missing;
  for (StratumKey key : observed) {
    try {
      const Table t = sample_conditional(gen, keyer.assignment(key), options.k_cond, rng);
      cal.means[key] = {mean_of(t.column(spec.exposure)), mean_of(t.column(spec.outcome)),
                        t.rows()};
    } catch (const ConditionTooRare& e) {
      if (options.strict) throw;
      cal.warnings.push_back(std::string(e.what()) + "; using marginal fallback");
      missing.push_back(key);
    }
  }

  const Table large = gen.sample(options.k_large, rng);
  const auto large_keys = keyer.keys(large);
  const auto a = large.column(spec.exposure);
  const auto y = large.column(spec.outcome);
  StratumMap extra;
  for (std::size_t i = 0; i < large.rows(); ++i) {
    if (cal.means.count(large_keys[i])) continue;
    auto& s = extra[large_keys[i]];
    s.mean_a += a[i];
    s.mean_y += y[i];
    ++s.count;
  }
  for (auto& [key, s] : extra) {
    s.mean_a /= static_cast<double>(s.count);
    s.mean_y /= static_cast<double>(s.count);
    cal.means.emplace(key, s);
  }
  cal.fallback_a = mean_of(a);
  const double fallback_y = mean_of(y);
  for (StratumKey key : missing) {
    if (!cal.means.count(key)) cal.means[key] = {cal.fallback_a, fallback_y, 0};
  }
  cal.theta_pn = estimate_lincoef(large, spec, cal.means).theta;
  return cal;
}

std::map<StratumKey, double> exposure_means(const StratumMap& means) {
  std::map<StratumKey, double> out;
  for (const auto& [key, s] : means) out.emplace(key, s.mean_a);
  return out;
}

struct ArmMeans {
  std::vector<double> original;
  std::vector<double> generated;
};

ArmMeans arm_means(const FittedGenerator& gen, const Table& original, const std::string& outcome,
                   const std::string& arm, std::size_t k_large, Rng& rng) {
  ArmMeans out;
  for (const auto& [level, part] : split_by(original, arm)) {
    if (part.rows() == 0)
      throw EmptyArm("debias: arm " + arm + "=" + std::to_string(level) + " absent in original");
    out.original.push_back(mean_of(part.column(outcome)));
  }
  const Table large = gen.sample(k_large, rng);
  for (const auto& [level, part] : split_by(large, arm)) {
    if (part.rows() == 0)
      throw ConditionTooRare(describe(large.schema(), {{arm, level}}), k_large, 0);
    out.generated.push_back(mean_of(part.column(outcome)));
  }
  return out;
}

bool is_binary(const Schema& schema, const std::string& column) {
  return schema.column(column).kind.kind() == Kind::kBinary;
}

}  // namespace

double theta_under_generator(const FittedGenerator& gen, const EstimandSpec& estimand,
                             std::size_t k_large, Rng& rng, const StratumMap* means) {
  const Table t = gen.sample(k_large, rng);
  switch (estimand.type) {
    case EstimandSpec::Type::kMean:
      return estimate_mean(t, estimand.outcome).theta;
    case EstimandSpec::Type::kRiskDifference:
      return estimate_risk_difference(t, estimand.outcome, estimand.exposure).theta;
    case EstimandSpec::Type::kLinCoef:
      if (means) return estimate_lincoef(t, estimand, *means).theta;
      {
        Rng unused(0);
        return estimate(t, estimand, Method::kMle, 1, unused, false).theta;
      }
  }
  return 0.0;
}

double regression_bias(const Table& original, const EstimandSpec& spec, const StratumMap& means,
                       double theta_pn) {
  return estimate_lincoef(original, spec, means).theta - theta_pn;
}

DebiasResult debias_mean(const GeneratorPtr& gen, const Table& original,
                         const std::string& column, const DebiasOptions& options, Rng& rng) {
  check_options(options);
  const auto estimand = EstimandSpec::mean(column);
  estimand.validate(original.schema());
  if (original.rows() == 0) throw ValidationError("debias: empty original table");
  Rng verify_rng(rng.next_u64());

  DebiasResult result;
  auto& report = result.report;
  report.estimand = estimand;
  report.k_large = options.k_large;
  const double target = mean_of(original.column(column));
  report.theta_hat_pn = theta_under_generator(*gen, estimand, options.k_large, rng);
  report.shift = target - report.theta_hat_pn;
  report.relaxed_binary = is_binary(gen->schema(), column);
  if (report.relaxed_binary)
    report.warnings.push_back("binary column " + column + " relaxed to continuous by the shift");
  result.generator = std::make_shared<MeanShiftedGenerator>(gen, column, report.shift);
  if (options.verify)
    report.residual_after_shift =
        target - theta_under_generator(*result.generator, estimand, options.k_large, verify_rng);
  return result;
}

DebiasResult debias_regression(const GeneratorPtr& gen, const Table& original,
                               const EstimandSpec& spec, const DebiasOptions& options, Rng& rng) {
  check_options(options);
  if (spec.type != EstimandSpec::Type::kLinCoef)
    throw ValidationError("debias_regression needs a lincoef estimand");
  spec.validate(original.schema());
  if (original.rows() == 0) throw ValidationError("debias: empty original table");
  Rng verify_rng(rng.next_u64());

  DebiasResult result;
  auto& report = result.report;
  report.estimand = spec;
  report.k_large = options.k_large;
  report.k_cond = options.k_cond;
  auto cal = calibrate_regression(*gen, original, spec, options, rng);
  report.theta_hat_pn = cal.theta_pn;
  report.shift = regression_bias(original, spec, cal.means, cal.theta_pn);
  report.warnings = std::move(cal.warnings);
  report.relaxed_binary = is_binary(gen->schema(), spec.outcome);
  result.generator = std::make_shared<RegressionShiftedGenerator>(
      gen, spec.outcome, spec.exposure, spec.covariates, report.shift,
      exposure_means(cal.means), cal.fallback_a, options.strict);
  if (options.verify) {
    const auto after = calibrate_regression(*result.generator, original, spec, options, verify_rng);
    report.residual_after_shift = regression_bias(original, spec, after.means, after.theta_pn);
  }
  return result;
}

DebiasResult debias_mean_per_arm(const GeneratorPtr& gen, const Table& original,
                                 const std::string& outcome, const std::string& arm,
                                 const DebiasOptions& options, Rng& rng) {
  check_options(options);
  const auto estimand = EstimandSpec::risk_difference(outcome, arm);
  estimand.validate(original.schema());
  Rng verify_rng(rng.next_u64());

  DebiasResult result;
  auto& report = result.report;
  report.estimand = estimand;
  report.k_large = options.k_large;
  const auto means = arm_means(*gen, original, outcome, arm, options.k_large, rng);
  report.arm_theta = means.generated;
  for (std::size_t g = 0; g < 2; ++g)
    report.arm_deltas.push_back(means.original[g] - means.generated[g]);
  report.theta_hat_pn = means.generated[1] - means.generated[0];
  report.relaxed_binary = is_binary(gen->schema(), outcome);
  result.generator = std::make_shared<PerArmShiftedGenerator>(gen, outcome, arm, report.arm_deltas);
  if (options.verify) {
    const double target = means.original[1] - means.original[0];
    report.residual_after_shift =
        target - theta_under_generator(*result.generator, estimand, options.k_large, verify_rng);
  }
  return result;
}

DebiasResult debias(const GeneratorPtr& gen, const Table& original, const EstimandSpec& estimand,
                    const DebiasOptions& options, Rng& rng) {
  switch (estimand.type) {
    case EstimandSpec::Type::kMean:
      return debias_mean(gen, original, estimand.outcome, options, rng);
    case EstimandSpec::Type::kLinCoef:
      return debias_regression(gen, original, estimand, options, rng);
    case EstimandSpec::Type::kRiskDifference:
      return debias_mean_per_arm(gen, original, estimand.outcome, estimand.exposure, options, rng);
  }
  throw ValidationError("unknown estimand");
}

DebiasResult debias_split(const GeneratorSpec& spec, const GeneratorPtr& gen,
                          const Table& original, const EstimandSpec& estimand,
                          const DebiasOptions& options, Rng& rng) {
  check_options(options);
  const std::size_t k = options.split_folds;
  if (k < 2) return debias(gen, original, estimand, options, rng);
  estimand.validate(original.schema());
  const std::size_t n = original.rows();
  if (n < 2 * k) throw ValidationError("debias split: fewer than two rows per fold");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));

  DebiasResult result;
  auto& report = result.report;
  report.estimand = estimand;
  report.k_large = options.k_large;
  report.split_folds = k;
  double shift = 0.0, theta = 0.0;
  std::vector<double> arm_deltas(2, 0.0), arm_theta(2, 0.0);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, held_rows;
    for (std::size_t i = 0; i < n; ++i) (i % k == f ? held_rows : train_rows).push_back(perm[i]);
    const Table train = original.select_rows(train_rows);
    const Table held = original.select_rows(held_rows);
    const GeneratorPtr fold_gen = fit_generator(spec, train, rng);
    switch (estimand.type) {
      case EstimandSpec::Type::kMean: {
        const double t = theta_under_generator(*fold_gen, estimand, options.k_large, rng);
        theta += t;
        shift += mean_of(held.column(estimand.outcome)) - t;
        break;
      }
      case EstimandSpec::Type::kLinCoef: {
        auto cal = calibrate_regression(*fold_gen, held, estimand, options, rng);
        theta += cal.theta_pn;
        shift += regression_bias(held, estimand, cal.means, cal.theta_pn);
        for (auto& w : cal.warnings) report.warnings.push_back(std::move(w));
        break;
      }
      case EstimandSpec::Type::kRiskDifference: {
        const auto means = arm_means(*fold_gen, held, estimand.outcome, estimand.exposure,
                                     options.k_large, rng);
        for (std::size_t g = 0; g < 2; ++g) {
          arm_theta[g] += means.generated[g];
          arm_deltas[g] += means.original[g] - means.generated[g];
        }
        break;
      }
    }
  }
  const double kd = static_cast<double>(k);
  report.theta_hat_pn = theta / kd;
  report.shift = shift / kd;
  switch (estimand.type) {
    case EstimandSpec::Type::kMean:
      report.relaxed_binary = is_binary(gen->schema(), estimand.outcome);
      result.generator = std::make_shared<MeanShiftedGenerator>(gen, estimand.outcome, report.shift);
      break;
    case EstimandSpec::Type::kLinCoef: {
      report.k_cond = options.k_cond;
      auto cal = calibrate_regression(*gen, original, estimand, options, rng);
      result.generator = std::make_shared<RegressionShiftedGenerator>(
          gen, estimand.outcome, estimand.exposure, estimand.covariates, report.shift,
          exposure_means(cal.means), cal.fallback_a, options.strict);
      break;
    }
    case EstimandSpec::Type::kRiskDifference:
      for (std::size_t g = 0; g < 2; ++g) {
        report.arm_theta.push_back(arm_theta[g] / kd);
        report.arm_deltas.push_back(arm_deltas[g] / kd);
      }
      report.theta_hat_pn = report.arm_theta[1] - report.arm_theta[0];
      result.generator = std::make_shared<PerArmShiftedGenerator>(
          gen, estimand.outcome, estimand.exposure, report.arm_deltas);
      break;
  }
  return result;
}

}  // namespace synthdebias
