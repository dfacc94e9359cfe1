#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "synthdebias/table.hpp"

namespace synthdebias {

struct QualityReport {
  double ikld = 0.0;
  std::size_t exact_copies = 0;
  std::map<std::string, double> per_column_kl;
};

// Per-column KL(original || synthetic) on binned marginals (continuous: equal
// width over the pooled range; discrete: levels), add-one smoothed. Score is
// 1 / (1 + mean KL). Marginal only, and directional.
double ikld(const Table& original, const Table& synthetic, std::size_t bins = 10,
            std::map<std::string, double>* per_column = nullptr);

// Synthetic rows bit-identical to some original row.
std::size_t count_exact_copies(const Table& original, const Table& synthetic);

QualityReport assess_quality(const Table& original, const Table& synthetic,
                             std::size_t bins = 10);

}  // namespace synthdebias
