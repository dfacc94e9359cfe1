#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthdebias/table.hpp"

namespace synthdebias {

using StratumKey = std::uint64_t;

// Mixed-radix encoding of a tuple of discrete covariate levels.
class StratumKeyer {
 public:
  StratumKeyer() = default;
  // Throws ValidationError unless every covariate is a discrete column.
  StratumKeyer(const Schema& schema, const std::vector<std::string>& covariates);

  StratumKey key(const Table& table, std::size_t row) const;
  std::vector<StratumKey> keys(const Table& table) const;

  Assignment assignment(StratumKey key) const;
  std::string label(const Schema& schema, StratumKey key) const;

  const std::vector<std::string>& covariates() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> radix_;
};

}  // namespace synthdebias
