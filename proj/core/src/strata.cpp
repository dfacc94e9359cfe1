#include "synthdebias/strata.hpp"

#include <sstream>

#include "synthdebias/errors.hpp"

namespace synthdebias {

StratumKeyer::StratumKeyer(const Schema& schema, const std::vector<std::string>& covariates)
    : names_(covariates) {
  for (const auto& name : covariates) {
    const auto& kind = schema.column(name).kind;
    if (!kind.is_discrete())
      throw ValidationError("covariate must be discrete: " + name);
    radix_.push_back(kind.level_count());
  }
}

StratumKey StratumKeyer::key(const Table& table, std::size_t row) const {
  StratumKey k = 0;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    const auto level = static_cast<StratumKey>(table.column(names_[c])[row]);
    k = k * radix_[c] + level;
  }
  return k;
}

std::vector<StratumKey> StratumKeyer::keys(const Table& table) const {
  std::vector<std::span<const double>> cols;
  for (const auto& name : names_) cols.push_back(table.column(name));
  std::vector<StratumKey> out(table.rows(), 0);
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < out.size(); ++r)
      out[r] = out[r] * radix_[c] + static_cast<StratumKey>(cols[c][r]);
  return out;
}

Assignment StratumKeyer::assignment(StratumKey key) const {
  Assignment a(names_.size());
  for (std::size_t c = names_.size(); c-- > 0;) {
    a[c] = {names_[c], static_cast<std::size_t>(key % radix_[c])};
    key /= radix_[c];
  }
  return a;
}

std::string StratumKeyer::label(const Schema& schema, StratumKey key) const {
  if (names_.empty()) return "(all)";
  return describe(schema, assignment(key));
}

}  // namespace synthdebias
