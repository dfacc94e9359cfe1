#pragma once

#include <cstddef>
#include <utility>

#include "synthdebias/estimand.hpp"
#include "synthdebias/estimators.hpp"

namespace synthdebias {

enum class DataKind { kOriginal, kDefaultSynthetic, kDebiasedSynthetic };
const char* data_kind_name(DataKind kind);

inline constexpr double kZ975 = 1.959963984540054;
inline constexpr double kMinSe = 1e-10;
inline constexpr double kMaxSe = 1e2;

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct EstimateReport {
  EstimandSpec estimand;
  double theta = 0.0;
  double se_mle = 0.0;
  double se_mle_corrected = 0.0;
  double se_eic = 0.0;
  Interval ci;  // from the SE selected by se_method
  std::size_t n = 0;
  std::size_t m = 0;
  DataKind data_kind = DataKind::kOriginal;
  Method se_method = Method::kEic;

  double selected_se() const { return se_method == Method::kMle ? se_mle_corrected : se_eic; }
};

// Classical SE with the m-1 variance denominator. Mean: sd/sqrt(m). LinCoef:
// homoskedastic dummy-regression SE (needs a k = 1 fit). RiskDifference:
// binomial form for binary outcomes, per-arm sample variances otherwise.
double se_mle(const EstimatorFit& fit, const EstimandSpec& estimand);

// sqrt((1/m + 1/n) * mean(eic^2)) with m = fit.n_used.
double se_eic(const EstimatorFit& fit, std::size_t n);
// sqrt(mean(eic^2) / m), for estimates on the original data.
double se_eic(const EstimatorFit& fit);

double correction_factor(std::size_t n, std::size_t m);

Interval wald_ci(double theta, double se, double level = 0.95);
bool covers(const Interval& ci, double truth);

bool se_in_range(double se);

// The fit's method picks the SE behind the interval. n is the original size;
// for DataKind::kOriginal the synthetic terms are dropped.
EstimateReport make_report(const EstimatorFit& fit, const EstimandSpec& estimand,
                           DataKind data_kind, std::size_t n, double level = 0.95);

}  // namespace synthdebias
