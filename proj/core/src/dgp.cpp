#include "synthdebias/dgp.hpp"

#include <cmath>

#include "synthdebias/errors.hpp"

namespace synthdebias {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void DgpParams::validate() const {
  if (!(sd_age > 0.0)) throw ValidationError("dgp: sd_age must be > 0");
  if (!(sd_bp > 0.0)) throw ValidationError("dgp: sd_bp must be > 0");
  if (!(p_therapy > 0.0 && p_therapy < 1.0))
    throw ValidationError("dgp: p_therapy must lie in (0, 1)");
  if (!(nu_intercepts[0] < nu_intercepts[1] && nu_intercepts[1] < nu_intercepts[2]))
    throw ValidationError("dgp: nu_intercepts must be strictly increasing");
}

Schema dgp_schema() {
  return Schema({
      {"age", ColumnKind::continuous()},
      {"stage", ColumnKind::ordinal({"I", "II", "III", "IV"})},
      {"therapy", ColumnKind::binary()},
      {"bp", ColumnKind::continuous()},
  });
}

std::array<double, 4> stage_probabilities(double age, const DgpParams& params) {
  const double c1 = sigmoid(params.nu_intercepts[0] - params.nu_age * age);
  const double c2 = sigmoid(params.nu_intercepts[1] - params.nu_age * age);
  const double c3 = sigmoid(params.nu_intercepts[2] - params.nu_age * age);
  return {c1, c2 - c1, c3 - c2, 1.0 - c3};
}

Table sample_dgp(std::size_t n, const DgpParams& params, Rng& rng) {
  params.validate();
  std::vector<double> age(n), stage(n), therapy(n), bp(n);
  for (std::size_t i = 0; i < n; ++i) {
    age[i] = rng.normal(params.mean_age, params.sd_age);
    const auto probs = stage_probabilities(age[i], params);
    const std::size_t s = rng.categorical(probs);
    stage[i] = static_cast<double>(s);
    therapy[i] = rng.bernoulli(params.p_therapy) ? 1.0 : 0.0;
    const double mu = params.baseline_bp + params.beta_stage[s] + params.beta_therapy * therapy[i];
    bp[i] = rng.normal(mu, params.sd_bp);
  }
  return Table(dgp_schema(), {std::move(age), std::move(stage), std::move(therapy), std::move(bp)});
}

TrueParams true_parameters(const DgpParams& params) {
  params.validate();
  return {params.mean_age, params.beta_therapy};
}

}  // namespace synthdebias
