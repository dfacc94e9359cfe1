// Writes a two-arm trial population (aspirin, death, sex, age_group, sbp)
// with fixed arm sizes and death counts, plus its schema file.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "synthdebias/config.hpp"
#include "synthdebias/csv.hpp"
#include "synthdebias/random.hpp"

using namespace synthdebias;

namespace {

constexpr std::size_t kRows = 19285;
constexpr std::size_t kTreated = 9643;
constexpr std::size_t kDeathsTreated = 2073;
constexpr std::size_t kDeathsControl = 2160;
constexpr std::uint64_t kSeed = 19285;

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_population <population.csv> <schema.yaml>\n";
    return 2;
  }
  const Schema schema({{"aspirin", ColumnKind::binary()},
                       {"death", ColumnKind::binary()},
                       {"sex", ColumnKind::categorical({"F", "M"})},
                       {"age_group", ColumnKind::ordinal({"lt60", "60to69", "70to79", "ge80"})},
                       {"sbp", ColumnKind::continuous()}});
  Rng rng(kSeed);
  const double age_probs[] = {0.22, 0.25, 0.32, 0.21};

  std::vector<double> aspirin(kRows), death(kRows, 0.0), sex(kRows), age(kRows), sbp(kRows),
      risk(kRows);
  std::vector<std::size_t> order(kRows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t i = 0; i < kRows; ++i) aspirin[order[i]] = i < kTreated ? 1.0 : 0.0;

  for (std::size_t i = 0; i < kRows; ++i) {
    sex[i] = rng.bernoulli(0.47) ? 1.0 : 0.0;
    age[i] = static_cast<double>(rng.categorical(age_probs));
    sbp[i] = std::round(rng.normal(150.0 + 4.0 * age[i], 25.0));
    const double u = rng.uniform_open();
    risk[i] = 0.7 * age[i] + 0.2 * sex[i] + 0.01 * (sbp[i] - 160.0) + std::log(u / (1.0 - u));
  }
  for (double arm : {1.0, 0.0}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < kRows; ++i)
      if (aspirin[i] == arm) rows.push_back(i);
    const std::size_t deaths = arm == 1.0 ? kDeathsTreated : kDeathsControl;
    std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(deaths), rows.end(),
                      [&](std::size_t a, std::size_t b) { return risk[a] > risk[b]; });
    for (std::size_t k = 0; k < deaths; ++k) death[rows[k]] = 1.0;
  }

  const Table table(schema, {aspirin, death, sex, age, sbp});
  write_csv(std::filesystem::path(argv[1]), table);
  std::ofstream out(argv[2]);
  out << schema_to_yaml(schema);
  return out ? 0 : 1;
}
