#include "synthdebias/estimand.hpp"

#include <sstream>

#include "synthdebias/errors.hpp"

namespace synthdebias {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::pair<std::string, std::string> split_once(const std::string& s, char sep,
                                               const std::string& text) {
  const auto pos = s.find(sep);
  if (pos == std::string::npos)
    throw ValidationError("estimand '" + text + "': expected '" + std::string(1, sep) + "'");
  return {trim(s.substr(0, pos)), trim(s.substr(pos + 1))};
}

void require_name(const std::string& name, const std::string& text) {
  if (name.empty()) throw ValidationError("estimand '" + text + "': empty column name");
}

}  // namespace

EstimandSpec EstimandSpec::parse(const std::string& text) {
  const auto [type, body] = split_once(text, ':', text);
  if (type == "mean") {
    require_name(body, text);
    return mean(body);
  }
  if (type == "rd") {
    const auto [y, arm] = split_once(body, '~', text);
    require_name(y, text);
    require_name(arm, text);
    return risk_difference(y, arm);
  }
  if (type == "lincoef") {
    const auto [y, rhs] = split_once(body, '~', text);
    require_name(y, text);
    std::string a = rhs;
    std::vector<std::string> covariates;
    if (const auto bar = rhs.find('|'); bar != std::string::npos) {
      a = trim(rhs.substr(0, bar));
      std::stringstream cov(rhs.substr(bar + 1));
      std::string item;
      while (std::getline(cov, item, '+')) {
        item = trim(item);
        require_name(item, text);
        covariates.push_back(item);
      }
    }
    require_name(a, text);
    return lincoef(y, trim(a), covariates);
  }
  throw ValidationError("estimand '" + text + "': unknown type '" + type + "'");
}

std::string EstimandSpec::to_string() const {
  switch (type) {
    case Type::kMean: return "mean:" + outcome;
    case Type::kRiskDifference: return "rd:" + outcome + "~" + exposure;
    case Type::kLinCoef: {
      std::string s = "lincoef:" + outcome + "~" + exposure;
      for (std::size_t i = 0; i < covariates.size(); ++i) s += (i ? "+" : "|") + covariates[i];
      return s;
    }
  }
  return "?";
}

void EstimandSpec::validate(const Schema& schema) const {
  const auto& y = schema.column(outcome).kind;
  switch (type) {
    case Type::kMean:
      if (!y.is_numeric())
        throw ValidationError("mean estimand needs a continuous or binary column: " + outcome);
      break;
    case Type::kLinCoef: {
      if (!y.is_numeric()) throw ValidationError("lincoef outcome must be numeric: " + outcome);
      if (!schema.column(exposure).kind.is_numeric())
        throw ValidationError("lincoef exposure must be numeric: " + exposure);
      for (const auto& c : covariates) {
        if (!schema.column(c).kind.is_discrete())
          throw ValidationError("lincoef covariate must be discrete: " + c);
        if (c == outcome || c == exposure)
          throw ValidationError("lincoef covariate repeats outcome or exposure: " + c);
      }
      if (outcome == exposure) throw ValidationError("lincoef outcome equals exposure");
      break;
    }
    case Type::kRiskDifference:
      // Debiased outcomes are relaxed to continuous, so numeric is enough.
      if (!y.is_numeric()) throw ValidationError("rd outcome must be binary: " + outcome);
      if (schema.column(exposure).kind.kind() != Kind::kBinary)
        throw ValidationError("rd arm must be binary: " + exposure);
      break;
  }
}

}  // namespace synthdebias
