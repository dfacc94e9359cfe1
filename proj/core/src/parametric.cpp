#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "glm.hpp"
#include "synthdebias/errors.hpp"
#include "synthdebias/generators.hpp"

namespace synthdebias {

// Conditional model of column j given every preceding column.
struct ParametricGenerator::ColumnModel {
  Kind kind;
  std::size_t levels = 0;
  Eigen::VectorXd beta;             // continuous, binary
  double sigma = 0.0;               // continuous
  glm::CumulativeLogitFit ordinal;  // ordinal
  glm::MultinomialFit categorical;  // categorical
};

namespace {

std::size_t feature_width(const ColumnKind& kind) {
  switch (kind.kind()) {
    case Kind::kContinuous:
    case Kind::kBinary: return 1;
    default: return kind.level_count() - 1;
  }
}

}  // namespace

ParametricGenerator::~ParametricGenerator() = default;

void ParametricGenerator::append_features(std::size_t column, double value,
                                          std::vector<double>& features) const {
  const auto& kind = schema_[column].kind;
  switch (kind.kind()) {
    case Kind::kContinuous:
      features.push_back(column_scale_[column] > 0.0
                             ? (value - column_mean_[column]) / column_scale_[column]
                             : 0.0);
      break;
    case Kind::kBinary:
      features.push_back(value);
      break;
    default: {
      const auto level = static_cast<std::size_t>(value);
      for (std::size_t k = 1; k < kind.level_count(); ++k) features.push_back(level == k ? 1.0 : 0.0);
    }
  }
}

ParametricGenerator::ParametricGenerator(const Table& train)
    : schema_(train.schema()), train_n_(train.rows()) {
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  column_mean_.assign(d, 0.0);
  column_scale_.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    if (schema_[j].kind.kind() != Kind::kContinuous) continue;
    const auto col = train.column(j);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    column_mean_[j] = mean;
    column_scale_[j] = std::sqrt(ss / static_cast<double>(n));
  }

  prefix_len_.resize(d);
  std::size_t width = 1;
  for (std::size_t j = 0; j < d; ++j) {
    prefix_len_[j] = width;
    width += feature_width(schema_[j].kind);
  }

  // Full design, built once; column j's model uses the first prefix_len_[j] columns.
  Eigen::MatrixXd design(n, width);
  {
    std::vector<double> features;
    for (std::size_t i = 0; i < n; ++i) {
      features.assign(1, 1.0);
      for (std::size_t j = 0; j < d; ++j) append_features(j, train.at(i, j), features);
      for (std::size_t k = 0; k < width; ++k) design(i, static_cast<Eigen::Index>(k)) = features[k];
    }
  }

  for (std::size_t j = 0; j < d; ++j) {
    auto model = std::make_unique<ColumnModel>();
    const auto& kind = schema_[j].kind;
    model->kind = kind.kind();
    model->levels = kind.level_count();
    const auto p = static_cast<Eigen::Index>(prefix_len_[j]);
    const Eigen::MatrixXd x = design.leftCols(p);
    const auto col = train.column(j);
    switch (kind.kind()) {
      case Kind::kContinuous: {
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(n));
        auto fit = glm::fit_gaussian(x, y);
        model->beta = std::move(fit.beta);
        model->sigma = fit.sigma;
        break;
      }
      case Kind::kBinary: {
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(n));
        model->beta = glm::fit_logistic(x, y).beta;
        break;
      }
      case Kind::kOrdinal:
      case Kind::kCategorical: {
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(col[i]);
        const int levels = static_cast<int>(kind.level_count());
        if (levels < 2) break;  // single-level column is constant
        if (kind.kind() == Kind::kOrdinal)
          model->ordinal = glm::fit_cumulative_logit(design.block(0, 1, static_cast<Eigen::Index>(n), p - 1), y, levels);
        else
          model->categorical = glm::fit_multinomial(x, y, levels);
        break;
      }
    }
    models_.push_back(std::move(model));
  }
}

std::vector<double> ParametricGenerator::coefficients(std::size_t column) const {
  const auto& beta = models_.at(column)->beta;
  return std::vector<double>(beta.data(), beta.data() + beta.size());
}

double ParametricGenerator::residual_sd(std::size_t column) const { return models_.at(column)->sigma; }

bool ParametricGenerator::draw_row(std::span<double> row, std::span<const double> fixed, Rng& rng,
                                   std::vector<double>& features,
                                   std::vector<double>& scratch) const {
  features.assign(1, 1.0);
  for (std::size_t j = 0; j < models_.size(); ++j) {
    const auto& model = *models_[j];
    const std::size_t p = prefix_len_[j];
    const bool forced = !fixed.empty() && fixed[j] >= 0.0;
    double value = 0.0;
    switch (model.kind) {
      case Kind::kContinuous: {
        double mu = 0.0;
        for (std::size_t k = 0; k < p; ++k) mu += model.beta[static_cast<Eigen::Index>(k)] * features[k];
        value = mu + model.sigma * rng.normal();
        break;
      }
      case Kind::kBinary: {
        double eta = 0.0;
        for (std::size_t k = 0; k < p; ++k) eta += model.beta[static_cast<Eigen::Index>(k)] * features[k];
        const double pi = glm::sigmoid(eta);
        if (forced) {
          if (!(rng.uniform() < (fixed[j] == 1.0 ? pi : 1.0 - pi))) return false;
          value = fixed[j];
        } else {
          value = rng.uniform() < pi ? 1.0 : 0.0;
        }
        break;
      }
      case Kind::kOrdinal:
      case Kind::kCategorical: {
        if (model.levels < 2) {
          value = 0.0;
          break;
        }
        if (model.kind == Kind::kOrdinal) {
          double eta = 0.0;
          const auto& slope = model.ordinal.slope;
          for (std::size_t k = 1; k < p; ++k) eta += slope[static_cast<Eigen::Index>(k - 1)] * features[k];
          glm::cumulative_logit_probs(model.ordinal, eta, scratch);
        } else {
          const auto& coef = model.categorical.coef;
          scratch.assign(model.levels, 0.0);
          double mx = 0.0;
          for (std::size_t c = 1; c < model.levels; ++c) {
            double eta = 0.0;
            for (std::size_t k = 0; k < p; ++k)
              eta += coef(static_cast<Eigen::Index>(c - 1), static_cast<Eigen::Index>(k)) * features[k];
            scratch[c] = eta;
            mx = std::max(mx, eta);
          }
          double total = 0.0;
          for (std::size_t c = 0; c < model.levels; ++c) {
            scratch[c] = std::exp(scratch[c] - mx);
            total += scratch[c];
          }
          for (auto& s : scratch) s /= total;
        }
        if (forced) {
          if (!(rng.uniform() < scratch[static_cast<std::size_t>(fixed[j])])) return false;
          value = fixed[j];
        } else {
          value = static_cast<double>(rng.categorical(scratch));
        }
        break;
      }
    }
    row[j] = value;
    append_features(j, value, features);
  }
  return true;
}

Table ParametricGenerator::sample(std::size_t m, Rng& rng) const {
  const std::size_t d = schema_.size();
  std::vector<std::vector<double>> out(d, std::vector<double>(m));
  std::vector<double> row(d), features, scratch;
  for (std::size_t i = 0; i < m; ++i) {
    draw_row(row, {}, rng, features, scratch);
    for (std::size_t j = 0; j < d; ++j) out[j][i] = row[j];
  }
  return Table(schema_, std::move(out));
}

Table ParametricGenerator::conditional_sample(const Assignment& assignment, std::size_t m,
                                              Rng& rng) const {
  const auto conditions = resolve(schema_, assignment);
  const std::size_t d = schema_.size();
  std::vector<double> fixed(d, -1.0);
  for (const auto& [j, level] : conditions) fixed[j] = level;
  std::vector<std::vector<double>> out(d, std::vector<double>(m));
  std::vector<double> row(d), features, scratch;
  const std::size_t max_attempts = 1000 * std::max<std::size_t>(m, 1);
  std::size_t attempts = 0;
  for (std::size_t i = 0; i < m; ++i) {
    while (!draw_row(row, fixed, rng, features, scratch)) {
      if (++attempts >= max_attempts)
        throw ConditionTooRare(describe(schema_, assignment), attempts, i);
    }
    ++attempts;
    for (std::size_t j = 0; j < d; ++j) out[j][i] = row[j];
  }
  return Table(schema_, std::move(out));
}

}  // namespace synthdebias
