#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "synthdebias/random.hpp"
#include "synthdebias/strata.hpp"
#include "synthdebias/table.hpp"

namespace synthdebias {

// Which generative model to fit.
//
//   parametric           sequential GLM in schema order
//   smoothed_bootstrap   Gaussian-kernel bootstrap on ceil(n^centres) retained
//                        training rows, bandwidth h_j = bandwidth*1.06*sd_j*n^(-1/5)
//   gaussian_copula      empirical marginals joined by a Gaussian copula
//
// Text form: "parametric", "gaussian_copula",
// "smoothed_bootstrap:bandwidth=3,centres=0.5".
struct GeneratorSpec {
  enum class Type { kParametric, kSmoothedBootstrap, kGaussianCopula };

  Type type = Type::kParametric;
  double bandwidth_rule = 1.0;
  // Exponent g of the retained-centre count ceil(n^g); 1 keeps every row.
  double centres_exponent = 0.5;

  static GeneratorSpec parametric() { return {Type::kParametric, 1.0, 0.5}; }
  static GeneratorSpec smoothed_bootstrap(double bandwidth_rule, double centres_exponent = 0.5) {
    return {Type::kSmoothedBootstrap, bandwidth_rule, centres_exponent};
  }
  static GeneratorSpec gaussian_copula() { return {Type::kGaussianCopula, 1.0, 0.5}; }

  static GeneratorSpec parse(const std::string& text);
  std::string label() const;
  void validate() const;
};

// A distribution fitted to a training table. Immutable after construction;
// sampling needs a caller-owned stream, so one generator can serve many
// threads.
class FittedGenerator {
 public:
  virtual ~FittedGenerator() = default;

  virtual const Schema& schema() const = 0;
  virtual std::size_t train_n() const = 0;
  virtual Table sample(std::size_t m, Rng& rng) const = 0;

  // True when conditional_sample draws directly instead of by rejection.
  virtual bool supports_conditional() const { return false; }
  // Rows drawn from the distribution conditional on the assignment. The base
  // implementation is rejection sampling with default limits.
  virtual Table conditional_sample(const Assignment& assignment, std::size_t m, Rng& rng) const;
};

using GeneratorPtr = std::shared_ptr<const FittedGenerator>;

struct RejectionLimits {
  std::size_t batch = 0;      // 0 means 10*m
  std::size_t max_draws = 0;  // 0 means 1000*m
};

// Unconditional batches filtered through filter_rows until m matches are
// collected. Throws ConditionTooRare when max_draws rows are exhausted.
Table conditional_sample_rejection(const FittedGenerator& gen, const Assignment& assignment,
                                   std::size_t m, Rng& rng, RejectionLimits limits = {});

// Dispatches to direct conditional sampling when the generator supports it.
Table sample_conditional(const FittedGenerator& gen, const Assignment& assignment,
                         std::size_t m, Rng& rng);

// Fit a generator. Non-fatal fit notes (e.g. degenerate copula columns) are
// appended to warnings when given.
GeneratorPtr fit_generator(const GeneratorSpec& spec, const Table& train, Rng& rng,
                           std::vector<std::string>* warnings = nullptr);

// --- concrete generators exposed for diagnostics and tests ---

class SmoothedBootstrapGenerator final : public FittedGenerator {
 public:
  SmoothedBootstrapGenerator(const Table& train, double bandwidth_rule, double centres_exponent,
                             Rng& rng);

  const Schema& schema() const override { return centres_.schema(); }
  std::size_t train_n() const override { return train_n_; }
  Table sample(std::size_t m, Rng& rng) const override;

  const Table& centres() const noexcept { return centres_; }
  // Per column; zero for discrete columns.
  const std::vector<double>& bandwidths() const noexcept { return bandwidths_; }

 private:
  Table centres_;
  std::vector<double> bandwidths_;
  std::size_t train_n_;
};

class GaussianCopulaGenerator final : public FittedGenerator {
 public:
  GaussianCopulaGenerator(const Table& train, std::vector<std::string>* warnings);

  const Schema& schema() const override { return schema_; }
  std::size_t train_n() const override { return train_n_; }
  Table sample(std::size_t m, Rng& rng) const override;

  // Correlation of normal scores, row-major d x d.
  const std::vector<double>& correlation() const noexcept { return correlation_; }

 private:
  double inverse_marginal(std::size_t column, double u) const;

  Schema schema_;
  std::size_t train_n_;
  std::vector<std::vector<double>> sorted_;      // continuous marginals
  std::vector<std::vector<double>> cumulative_;  // discrete marginals
  std::vector<double> correlation_;
  std::vector<double> cholesky_;  // lower triangular, row-major
};

class ParametricGenerator final : public FittedGenerator {
 public:
  explicit ParametricGenerator(const Table& train);
  ~ParametricGenerator() override;

  const Schema& schema() const override { return schema_; }
  std::size_t train_n() const override { return train_n_; }
  Table sample(std::size_t m, Rng& rng) const override;

  bool supports_conditional() const override { return true; }
  // Exact: each conditioned column is accepted with probability
  // P(level | preceding columns), then later columns are drawn given it.
  Table conditional_sample(const Assignment& assignment, std::size_t m, Rng& rng) const override;

  // Linear-predictor coefficients of a continuous or binary column
  // (intercept first) and the residual SD of a continuous column.
  std::vector<double> coefficients(std::size_t column) const;
  double residual_sd(std::size_t column) const;

 private:
  struct ColumnModel;
  // Draws one row; a non-negative entry of fixed forces that column's level
  // with acceptance probability P(level | prefix). Returns false on rejection.
  bool draw_row(std::span<double> row, std::span<const double> fixed, Rng& rng,
                std::vector<double>& features, std::vector<double>& scratch) const;
  void append_features(std::size_t column, double value, std::vector<double>& features) const;

  Schema schema_;
  std::size_t train_n_;
  std::vector<std::unique_ptr<ColumnModel>> models_;
  std::vector<double> column_mean_;   // centring of continuous predictors
  std::vector<double> column_scale_;  // scaling of continuous predictors (0 drops it)
  std::vector<std::size_t> prefix_len_;  // features available to column j, incl. intercept
};

// --- shift wrappers realizing debiased generators ---

// Adds delta to one numeric column of every sampled row. A binary column is
// relaxed to continuous in the wrapper's schema.
class MeanShiftedGenerator final : public FittedGenerator {
 public:
  MeanShiftedGenerator(GeneratorPtr base, std::string column, double delta);

  const Schema& schema() const override { return schema_; }
  std::size_t train_n() const override { return base_->train_n(); }
  Table sample(std::size_t m, Rng& rng) const override;
  bool supports_conditional() const override { return base_->supports_conditional(); }
  Table conditional_sample(const Assignment& assignment, std::size_t m, Rng& rng) const override;

  double delta() const noexcept { return delta_; }
  const FittedGenerator& base() const noexcept { return *base_; }

 private:
  Table shift(Table t) const;

  GeneratorPtr base_;
  std::string column_;
  double delta_;
  Schema schema_;
};

// Adds b * (A - E(A|X)) to the outcome of every sampled row. Rows whose
// covariate stratum has no calibrated E(A|X) raise StratumUnestimable in
// strict mode; lenient mode uses fallback_mean_a and counts the event.
class RegressionShiftedGenerator final : public FittedGenerator {
 public:
  RegressionShiftedGenerator(GeneratorPtr base, std::string outcome, std::string exposure,
                             std::vector<std::string> covariates, double b,
                             std::map<StratumKey, double> cond_mean_a, double fallback_mean_a,
                             bool strict);

  const Schema& schema() const override { return schema_; }
  std::size_t train_n() const override { return base_->train_n(); }
  Table sample(std::size_t m, Rng& rng) const override;
  bool supports_conditional() const override { return base_->supports_conditional(); }
  Table conditional_sample(const Assignment& assignment, std::size_t m, Rng& rng) const override;

  double b() const noexcept { return b_; }
  std::size_t fallback_count() const noexcept { return fallbacks_.load(); }
  const FittedGenerator& base() const noexcept { return *base_; }

 private:
  Table shift(Table t) const;

  GeneratorPtr base_;
  std::string outcome_;
  std::string exposure_;
  StratumKeyer keyer_;
  double b_;
  std::map<StratumKey, double> cond_mean_a_;
  double fallback_mean_a_;
  bool strict_;
  Schema schema_;
  mutable std::atomic<std::size_t> fallbacks_{0};
};

// Shifts the outcome by delta[arm level] for each sampled row.
class PerArmShiftedGenerator final : public FittedGenerator {
 public:
  PerArmShiftedGenerator(GeneratorPtr base, std::string outcome, std::string arm,
                         std::vector<double> deltas);

  const Schema& schema() const override { return schema_; }
  std::size_t train_n() const override { return base_->train_n(); }
  Table sample(std::size_t m, Rng& rng) const override;
  bool supports_conditional() const override { return base_->supports_conditional(); }
  Table conditional_sample(const Assignment& assignment, std::size_t m, Rng& rng) const override;

  const std::vector<double>& deltas() const noexcept { return deltas_; }

 private:
  Table shift(Table t) const;

  GeneratorPtr base_;
  std::string outcome_;
  std::string arm_;
  std::vector<double> deltas_;
  Schema schema_;
};

}  // namespace synthdebias
