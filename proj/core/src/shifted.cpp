#include "synthdebias/errors.hpp"
#include "synthdebias/generators.hpp"

namespace synthdebias {

namespace {

Schema relaxed_to_continuous(const Schema& schema, const std::string& column) {
  const auto& kind = schema.column(column).kind;
  if (!kind.is_numeric())
    throw ValidationError("cannot shift non-numeric column " + column);
  return schema.with_kind(column, ColumnKind::continuous());
}

}  // namespace

MeanShiftedGenerator::MeanShiftedGenerator(GeneratorPtr base, std::string column, double delta)
    : base_(std::move(base)),
      column_(std::move(column)),
      delta_(delta),
      schema_(relaxed_to_continuous(base_->schema(), column_)) {}

Table MeanShiftedGenerator::shift(Table t) const {
  const std::size_t j = schema_.index_of(column_);
  const std::size_t rows = t.rows();
  auto columns = std::move(t).release_columns();
  for (std::size_t r = 0; r < rows; ++r) columns[j][r] += delta_;
  return Table(schema_, std::move(columns));
}

Table MeanShiftedGenerator::sample(std::size_t m, Rng& rng) const {
  return shift(base_->sample(m, rng));
}

Table MeanShiftedGenerator::conditional_sample(const Assignment& assignment, std::size_t m,
                                               Rng& rng) const {
  resolve(schema_, assignment);
  return shift(sample_conditional(*base_, assignment, m, rng));
}

RegressionShiftedGenerator::RegressionShiftedGenerator(
    GeneratorPtr base, std::string outcome, std::string exposure,
    std::vector<std::string> covariates, double b, std::map<StratumKey, double> cond_mean_a,
    double fallback_mean_a, bool strict)
    : base_(std::move(base)),
      outcome_(std::move(outcome)),
      exposure_(std::move(exposure)),
      keyer_(base_->schema(), covariates),
      b_(b),
      cond_mean_a_(std::move(cond_mean_a)),
      fallback_mean_a_(fallback_mean_a),
      strict_(strict),
      schema_(relaxed_to_continuous(base_->schema(), outcome_)) {
  if (!base_->schema().column(exposure_).kind.is_numeric())
    throw ValidationError("exposure must be continuous or binary: " + exposure_);
}

Table RegressionShiftedGenerator::shift(Table t) const {
  const std::size_t y = schema_.index_of(outcome_);
  const std::size_t a = schema_.index_of(exposure_);
  const auto keys = keyer_.keys(t);
  const std::size_t rows = t.rows();
  auto columns = std::move(t).release_columns();
  std::size_t fallbacks = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double mean_a;
    if (auto it = cond_mean_a_.find(keys[r]); it != cond_mean_a_.end()) {
      mean_a = it->second;
    } else if (strict_) {
      throw StratumUnestimable("regression shift: no calibrated E(A|X) for stratum " +
                               keyer_.label(base_->schema(), keys[r]));
    } else {
      mean_a = fallback_mean_a_;
      ++fallbacks;
    }
    columns[y][r] += b_ * (columns[a][r] - mean_a);
  }
  if (fallbacks) fallbacks_ += fallbacks;
  return Table(schema_, std::move(columns));
}

Table RegressionShiftedGenerator::sample(std::size_t m, Rng& rng) const {
  return shift(base_->sample(m, rng));
}

Table RegressionShiftedGenerator::conditional_sample(const Assignment& assignment, std::size_t m,
                                                     Rng& rng) const {
  resolve(schema_, assignment);
  return shift(sample_conditional(*base_, assignment, m, rng));
}

PerArmShiftedGenerator::PerArmShiftedGenerator(GeneratorPtr base, std::string outcome,
                                               std::string arm, std::vector<double> deltas)
    : base_(std::move(base)),
      outcome_(std::move(outcome)),
      arm_(std::move(arm)),
      deltas_(std::move(deltas)),
      schema_(relaxed_to_continuous(base_->schema(), outcome_)) {
  const auto& arm_kind = base_->schema().column(arm_).kind;
  if (!arm_kind.is_discrete() || arm_kind.level_count() != deltas_.size())
    throw ValidationError("per-arm shift needs one delta per level of " + arm_);
}

Table PerArmShiftedGenerator::shift(Table t) const {
  const std::size_t y = schema_.index_of(outcome_);
  const std::size_t g = schema_.index_of(arm_);
  const std::size_t rows = t.rows();
  auto columns = std::move(t).release_columns();
  for (std::size_t r = 0; r < rows; ++r)
    columns[y][r] += deltas_[static_cast<std::size_t>(columns[g][r])];
  return Table(schema_, std::move(columns));
}

Table PerArmShiftedGenerator::sample(std::size_t m, Rng& rng) const {
  return shift(base_->sample(m, rng));
}

Table PerArmShiftedGenerator::conditional_sample(const Assignment& assignment, std::size_t m,
                                                 Rng& rng) const {
  resolve(schema_, assignment);
  return shift(sample_conditional(*base_, assignment, m, rng));
}

}  // namespace synthdebias
