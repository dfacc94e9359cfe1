#include "synthdebias/estimators.hpp"

#include <cmath>
#include <numeric>

#include "synthdebias/errors.hpp"

namespace synthdebias {

const char* method_name(Method method) { return method == Method::kMle ? "MLE" : "EIC"; }

EstimatorFit estimate_mean(const Table& table, const std::string& column) {
  if (!table.schema().column(column).kind.is_numeric())
    throw ValidationError("mean of non-numeric column " + column);
  if (table.rows() == 0) throw ValidationError("mean of empty table");
  const auto v = table.column(column);
  EstimatorFit fit;
  fit.n_used = v.size();
  fit.theta = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  fit.eic.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) fit.eic[i] = v[i] - fit.theta;
  return fit;
}

namespace {

StratumMap stratum_means(std::span<const StratumKey> keys, std::span<const double> a,
                         std::span<const double> y, const std::vector<bool>* include) {
  StratumMap out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (include && !(*include)[i]) continue;
    auto& s = out[keys[i]];
    s.mean_a += a[i];
    s.mean_y += y[i];
    ++s.count;
  }
  for (auto& [key, s] : out) {
    s.mean_a /= static_cast<double>(s.count);
    s.mean_y /= static_cast<double>(s.count);
  }
  return out;
}

struct Residuals {
  std::vector<double> a;
  std::vector<double> y;
  std::size_t dropped = 0;
};

EstimatorFit finish_lincoef(const Residuals& r) {
  const std::size_t m = r.a.size();
  if (m == 0) throw StratumUnestimable("lincoef: no rows with nuisance predictions");
  double saa = 0.0, say = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    saa += r.a[i] * r.a[i];
    say += r.a[i] * r.y[i];
  }
  const double denom = saa / static_cast<double>(m);
  if (!(denom >= 1e-12))
    throw DegenerateExposure("lincoef: no exposure variation within strata");
  EstimatorFit fit;
  fit.theta = say / saa;
  fit.denominator = denom;
  fit.n_used = m;
  fit.dropped_rows = r.dropped;
  fit.eic.resize(m);
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = r.y[i] - fit.theta * r.a[i];
    rss += e * e;
    fit.eic[i] = r.a[i] * e / denom;
  }
  fit.residual_ss = rss;
  return fit;
}

}  // namespace

NuisanceModel fit_nuisance(const Table& table, const std::string& outcome,
                           const std::string& exposure, const std::vector<std::string>& covariates,
                           std::size_t folds, Rng& rng, bool drop_unestimable) {
  if (folds < 1) throw ValidationError("nuisance folds must be >= 1");
  if (table.rows() < folds) throw ValidationError("fewer rows than nuisance folds");
  NuisanceModel model;
  model.keyer = StratumKeyer(table.schema(), covariates);
  model.folds = folds;
  const auto keys = model.keyer.keys(table);
  const auto a = table.column(exposure);
  const auto y = table.column(outcome);
  model.strata = stratum_means(keys, a, y, nullptr);

  const std::size_t n = table.rows();
  model.predictions.resize(n);
  if (folds == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = model.strata.at(keys[i]);
      model.predictions[i] = std::make_pair(s.mean_a, s.mean_y);
    }
    return model;
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  model.fold_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) model.fold_of[perm[i]] = i % folds;

  model.per_fold.resize(folds);
  std::vector<bool> include(n);
  for (std::size_t f = 0; f < folds; ++f) {
    for (std::size_t i = 0; i < n; ++i) include[i] = model.fold_of[i] != f;
    model.per_fold[f] = stratum_means(keys, a, y, &include);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& strata = model.per_fold[model.fold_of[i]];
    if (auto it = strata.find(keys[i]); it != strata.end()) {
      model.predictions[i] = std::make_pair(it->second.mean_a, it->second.mean_y);
    } else if (!drop_unestimable) {
      throw StratumUnestimable("stratum " + model.keyer.label(table.schema(), keys[i]) +
                               " absent from the training folds of row " + std::to_string(i));
    }
  }
  return model;
}

EstimatorFit estimate_lincoef(const Table& table, const NuisanceModel& nuisance,
                              const EstimandSpec& spec) {
  spec.validate(table.schema());
  if (nuisance.predictions.size() != table.rows())
    throw ValidationError("nuisance model was fitted on a different table");
  const auto a = table.column(spec.exposure);
  const auto y = table.column(spec.outcome);
  Residuals r;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto& p = nuisance.predictions[i];
    if (!p) {
      ++r.dropped;
      continue;
    }
    r.a.push_back(a[i] - p->first);
    r.y.push_back(y[i] - p->second);
  }
  EstimatorFit fit = finish_lincoef(r);
  if (nuisance.folds == 1) {
    const std::size_t params = nuisance.strata.size() + 1;
    fit.residual_df = fit.n_used > params ? fit.n_used - params : 0;
  }
  return fit;
}

EstimatorFit estimate_lincoef(const Table& table, const EstimandSpec& spec,
                              const StratumMap& means, bool drop_unestimable) {
  spec.validate(table.schema());
  const StratumKeyer keyer(table.schema(), spec.covariates);
  const auto keys = keyer.keys(table);
  const auto a = table.column(spec.exposure);
  const auto y = table.column(spec.outcome);
  Residuals r;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto it = means.find(keys[i]);
    if (it == means.end()) {
      if (!drop_unestimable)
        throw StratumUnestimable("no conditional means for stratum " +
                                 keyer.label(table.schema(), keys[i]));
      ++r.dropped;
      continue;
    }
    r.a.push_back(a[i] - it->second.mean_a);
    r.y.push_back(y[i] - it->second.mean_y);
  }
  return finish_lincoef(r);
}

EstimatorFit estimate_risk_difference(const Table& table, const std::string& outcome,
                                      const std::string& arm) {
  const auto spec = EstimandSpec::risk_difference(outcome, arm);
  spec.validate(table.schema());
  const auto y = table.column(outcome);
  const auto g = table.column(arm);
  const std::size_t m = table.rows();
  EstimatorFit fit;
  fit.arms.resize(2);
  fit.binary_outcome = table.schema().column(outcome).kind.kind() == Kind::kBinary;
  for (std::size_t i = 0; i < m; ++i) {
    auto& s = fit.arms[static_cast<std::size_t>(g[i])];
    ++s.count;
    s.mean += y[i];
  }
  for (std::size_t level = 0; level < 2; ++level)
    if (fit.arms[level].count == 0)
      throw EmptyArm("rd: arm " + arm + "=" + std::to_string(level) + " has no rows");
  for (auto& s : fit.arms) s.mean /= static_cast<double>(s.count);
  for (std::size_t i = 0; i < m; ++i) {
    auto& s = fit.arms[static_cast<std::size_t>(g[i])];
    s.variance += (y[i] - s.mean) * (y[i] - s.mean);
  }
  for (auto& s : fit.arms)
    s.variance = s.count > 1 ? s.variance / static_cast<double>(s.count - 1) : 0.0;

  fit.theta = fit.arms[1].mean - fit.arms[0].mean;
  fit.n_used = m;
  const double p1 = static_cast<double>(fit.arms[1].count) / static_cast<double>(m);
  const double p0 = static_cast<double>(fit.arms[0].count) / static_cast<double>(m);
  fit.eic.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    fit.eic[i] = g[i] == 1.0 ? (y[i] - fit.arms[1].mean) / p1 : -(y[i] - fit.arms[0].mean) / p0;
  }
  return fit;
}

EstimatorFit estimate(const Table& table, const EstimandSpec& spec, Method method,
                      std::size_t folds, Rng& rng, bool drop_unestimable) {
  EstimatorFit fit;
  switch (spec.type) {
    case EstimandSpec::Type::kMean:
      fit = estimate_mean(table, spec.outcome);
      break;
    case EstimandSpec::Type::kRiskDifference:
      fit = estimate_risk_difference(table, spec.outcome, spec.exposure);
      break;
    case EstimandSpec::Type::kLinCoef: {
      spec.validate(table.schema());
      const std::size_t k = method == Method::kMle ? 1 : folds;
      const auto nuisance = fit_nuisance(table, spec.outcome, spec.exposure, spec.covariates, k,
                                         rng, drop_unestimable);
      fit = estimate_lincoef(table, nuisance, spec);
      break;
    }
  }
  fit.method = method;
  return fit;
}

double bias_term_synthetic_plugin(const EstimatorFit& fit) {
  if (fit.eic.empty()) return 0.0;
  const double sum = std::accumulate(fit.eic.begin(), fit.eic.end(), 0.0);
  return -sum / static_cast<double>(fit.eic.size());
}

}  // namespace synthdebias
