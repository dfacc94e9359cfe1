#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "synthdebias/generators.hpp"
#include "synthdebias/table.hpp"

namespace testing {

using namespace synthdebias;

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sd(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Emits the same row forever.
class ConstantGenerator final : public FittedGenerator {
 public:
  ConstantGenerator(Schema schema, std::vector<double> row)
      : schema_(std::move(schema)), row_(std::move(row)) {}
  const Schema& schema() const override { return schema_; }
  std::size_t train_n() const override { return 1; }
  Table sample(std::size_t m, Rng&) const override {
    std::vector<std::vector<double>> cols;
    for (double v : row_) cols.emplace_back(m, v);
    return Table(schema_, std::move(cols));
  }

 private:
  Schema schema_;
  std::vector<double> row_;
};

// Draws rows uniformly from a fixed table (an empirical distribution).
class EmpiricalGenerator final : public FittedGenerator {
 public:
  explicit EmpiricalGenerator(Table t) : table_(std::move(t)) {}
  const Schema& schema() const override { return table_.schema(); }
  std::size_t train_n() const override { return table_.rows(); }
  Table sample(std::size_t m, Rng& rng) const override {
    std::vector<std::size_t> idx(m);
    for (auto& i : idx) i = rng.index(table_.rows());
    return table_.select_rows(idx);
  }

 private:
  Table table_;
};

inline Schema xy_schema(std::vector<std::string> levels) {
  return Schema({{"x", ColumnKind::categorical(std::move(levels))},
                 {"a", ColumnKind::continuous()},
                 {"y", ColumnKind::continuous()}});
}

}  // namespace testing
