#pragma once

// Penalized maximum-likelihood fits for the sequential parametric generator.
// Each fit maximizes the log-likelihood minus 0.5 * ridge * |beta_{-0}|^2; the
// small ridge keeps separated or empty-level fits finite.

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace synthdebias::glm {

inline constexpr double kRidge = 1e-4;

struct GaussianFit {
  Eigen::VectorXd beta;
  double sigma = 0.0;
};

struct LogisticFit {
  Eigen::VectorXd beta;
};

// P(y <= k | x) = sigmoid(threshold_k - x' slope), x without intercept.
struct CumulativeLogitFit {
  Eigen::VectorXd thresholds;  // K-1, strictly increasing
  Eigen::VectorXd slope;
};

// Reference class 0; coef row k-1 holds class k.
struct MultinomialFit {
  Eigen::MatrixXd coef;  // (K-1) x p
};

// design: n x p with a leading intercept column.
GaussianFit fit_gaussian(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);
LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);
// design without intercept (n x q, q may be 0); y holds levels 0..K-1.
CumulativeLogitFit fit_cumulative_logit(const Eigen::MatrixXd& design,
                                        std::span<const int> y, int levels);
MultinomialFit fit_multinomial(const Eigen::MatrixXd& design, std::span<const int> y,
                               int levels);

double sigmoid(double x);

// Category probabilities given linear predictor eta = x' slope.
void cumulative_logit_probs(const CumulativeLogitFit& fit, double eta,
                            std::vector<double>& out);

// Negative penalized log-likelihood and its derivatives for the cumulative
// logit model, parameters stacked as (thresholds, slope). Exposed for tests.
struct CumulativeLogitObjective {
  const Eigen::MatrixXd& design;
  std::span<const int> y;
  int levels;

  double value(const Eigen::VectorXd& params) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& params) const;
};

}  // namespace synthdebias::glm
