#pragma once

#include <string>
#include <vector>

#include "synthdebias/table.hpp"

namespace synthdebias {

// Target of an analysis. Text forms:
//   mean:<column>
//   lincoef:<outcome>~<exposure>|<cov1>+<cov2>...   (covariates optional)
//   rd:<outcome>~<arm>
struct EstimandSpec {
  enum class Type { kMean, kLinCoef, kRiskDifference };

  Type type = Type::kMean;
  std::string outcome;  // the column for kMean
  std::string exposure;  // exposure (kLinCoef) or arm (kRiskDifference)
  std::vector<std::string> covariates;

  static EstimandSpec mean(std::string column) { return {Type::kMean, std::move(column), {}, {}}; }
  static EstimandSpec lincoef(std::string outcome, std::string exposure,
                              std::vector<std::string> covariates) {
    return {Type::kLinCoef, std::move(outcome), std::move(exposure), std::move(covariates)};
  }
  static EstimandSpec risk_difference(std::string outcome, std::string arm) {
    return {Type::kRiskDifference, std::move(outcome), std::move(arm), {}};
  }

  static EstimandSpec parse(const std::string& text);
  std::string to_string() const;
  // Checks that referenced columns exist with compatible kinds.
  void validate(const Schema& schema) const;

  bool operator==(const EstimandSpec&) const = default;
};

}  // namespace synthdebias
