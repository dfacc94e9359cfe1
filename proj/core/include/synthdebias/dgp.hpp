#pragma once

#include <array>
#include <cstddef>

#include "synthdebias/random.hpp"
#include "synthdebias/table.hpp"

namespace synthdebias {

// Hypothetical-disease process: age -> stage (cumulative logit),
// therapy randomized, blood pressure linear in stage and therapy.
struct DgpParams {
  double mean_age = 50.0;
  double sd_age = 10.0;
  // Cut-points for stages I, II, III; must be strictly increasing.
  std::array<double, 3> nu_intercepts{2.0, 3.0, 4.0};
  // Enters as Sigmoid(nu_k - nu_age * age).
  double nu_age = 0.05;
  double p_therapy = 0.5;
  std::array<double, 4> beta_stage{0.0, 10.0, 20.0, 30.0};
  double beta_therapy = -20.0;
  double baseline_bp = 120.0;
  double sd_bp = 10.0;

  // Throws ValidationError on violated invariants.
  void validate() const;
};

struct TrueParams {
  double mean_age;
  double therapy_effect;
};

// Columns age (continuous), stage (ordinal I..IV), therapy (binary), bp (continuous).
Schema dgp_schema();

std::array<double, 4> stage_probabilities(double age, const DgpParams& params);

Table sample_dgp(std::size_t n, const DgpParams& params, Rng& rng);

TrueParams true_parameters(const DgpParams& params);

}  // namespace synthdebias
