#include "synthdebias/inference.hpp"

#include <cmath>

#include "synthdebias/errors.hpp"
#include "synthdebias/random.hpp"

namespace synthdebias {

const char* data_kind_name(DataKind kind) {
  switch (kind) {
    case DataKind::kOriginal: return "original";
    case DataKind::kDefaultSynthetic: return "default";
    case DataKind::kDebiasedSynthetic: return "debiased";
  }
  return "?";
}

double se_mle(const EstimatorFit& fit, const EstimandSpec& estimand) {
  const double m = static_cast<double>(fit.n_used);
  switch (estimand.type) {
    case EstimandSpec::Type::kMean: {
      if (fit.n_used < 2) return 0.0;
      double ss = 0.0;
      for (double e : fit.eic) ss += e * e;
      return std::sqrt(ss / (m - 1.0) / m);
    }
    case EstimandSpec::Type::kLinCoef: {
      if (fit.residual_df == 0) return 0.0;
      const double sigma2 = fit.residual_ss / static_cast<double>(fit.residual_df);
      return std::sqrt(sigma2 / (fit.denominator * m));
    }
    case EstimandSpec::Type::kRiskDifference: {
      double var = 0.0;
      for (const auto& arm : fit.arms) {
        const double c = static_cast<double>(arm.count);
        var += fit.binary_outcome ? arm.mean * (1.0 - arm.mean) / c : arm.variance / c;
      }
      return std::sqrt(var);
    }
  }
  return 0.0;
}

namespace {
double mean_sq(const EstimatorFit& fit) {
  if (fit.eic.empty()) return 0.0;
  double ss = 0.0;
  for (double e : fit.eic) ss += e * e;
  return ss / static_cast<double>(fit.eic.size());
}
}  // namespace

double se_eic(const EstimatorFit& fit, std::size_t n) {
  if (n == 0) throw ValidationError("se_eic: n must be >= 1");
  if (fit.n_used == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(fit.n_used) + 1.0 / static_cast<double>(n);
  return std::sqrt(scale * mean_sq(fit));
}

double se_eic(const EstimatorFit& fit) {
  if (fit.n_used == 0) return 0.0;
  return std::sqrt(mean_sq(fit) / static_cast<double>(fit.n_used));
}

double correction_factor(std::size_t n, std::size_t m) {
  return std::sqrt(1.0 + static_cast<double>(m) / static_cast<double>(n));
}

Interval wald_ci(double theta, double se, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must be in (0, 1)");
  const double z = level == 0.95 ? kZ975 : normal_quantile(0.5 + level / 2.0);
  return {theta - z * se, theta + z * se};
}

bool covers(const Interval& ci, double truth) { return ci.low <= truth && truth <= ci.high; }

bool se_in_range(double se) { return se >= kMinSe && se <= kMaxSe; }

EstimateReport make_report(const EstimatorFit& fit, const EstimandSpec& estimand,
                           DataKind data_kind, std::size_t n, double level) {
  EstimateReport r;
  r.estimand = estimand;
  r.theta = fit.theta;
  r.n = n;
  r.m = fit.n_used;
  r.data_kind = data_kind;
  r.se_method = fit.method;
  r.se_mle = se_mle(fit, estimand);
  if (data_kind == DataKind::kOriginal) {
    r.se_mle_corrected = r.se_mle;
    r.se_eic = se_eic(fit);
  } else {
    r.se_mle_corrected = r.se_mle * correction_factor(n, r.m);
    r.se_eic = se_eic(fit, n);
  }
  r.ci = wald_ci(r.theta, r.selected_se(), level);
  return r;
}

}  // namespace synthdebias
