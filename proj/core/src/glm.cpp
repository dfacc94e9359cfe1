#include "glm.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "synthdebias/errors.hpp"

namespace synthdebias::glm {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Damped Newton on a convex objective. value() returns +inf outside the
// domain, which the backtracking search treats as a failed step.
Eigen::VectorXd newton_minimize(const std::function<double(const Eigen::VectorXd&)>& value,
                                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& hess,
                                Eigen::VectorXd x) {
  double fx = value(x);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd g = grad(x);
    if (g.lpNorm<Eigen::Infinity>() < 1e-10) break;
    Eigen::MatrixXd h = hess(x);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || g.dot(step) >= 0.0)
      step = -g;
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      const Eigen::VectorXd candidate = x + t * step;
      const double fc = value(candidate);
      if (std::isfinite(fc) && fc <= fx + 1e-4 * t * g.dot(step)) {
        x = candidate;
        const double improvement = fx - fc;
        fx = fc;
        moved = true;
        if (improvement < 1e-14 * (1.0 + std::fabs(fx))) return x;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace

GaussianFit fit_gaussian(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  const Eigen::Index p = design.cols();
  Eigen::MatrixXd gram = design.transpose() * design;
  for (Eigen::Index k = 1; k < p; ++k) gram(k, k) += kRidge;
  GaussianFit fit;
  fit.beta = gram.ldlt().solve(design.transpose() * y);
  const Eigen::VectorXd resid = y - design * fit.beta;
  fit.sigma = design.rows() > 0 ? std::sqrt(resid.squaredNorm() / static_cast<double>(design.rows()))
                                : 0.0;
  return fit;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  const Eigen::Index p = design.cols();
  auto penalty = [p](const Eigen::VectorXd& b) {
    return 0.5 * kRidge * b.tail(p - 1).squaredNorm();
  };
  auto value = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = design * b;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      // log(1 + exp(eta)) - y * eta, computed stably
      const double e = eta[i];
      const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      nll += softplus - y[i] * e;
    }
    return nll + penalty(b);
  };
  auto grad = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = design * b;
    Eigen::VectorXd r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = sigmoid(eta[i]) - y[i];
    Eigen::VectorXd g = design.transpose() * r;
    g.tail(p - 1) += kRidge * b.tail(p - 1);
    return g;
  };
  auto hess = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = design * b;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double pi = sigmoid(eta[i]);
      w[i] = pi * (1.0 - pi);
    }
    Eigen::MatrixXd h = design.transpose() * w.asDiagonal() * design;
    for (Eigen::Index k = 0; k < p; ++k) h(k, k) += (k == 0 ? 1e-10 : kRidge);
    return h;
  };
  Eigen::VectorXd start = Eigen::VectorXd::Zero(p);
  const double ybar = y.size() ? y.mean() : 0.5;
  const double clipped = std::min(std::max(ybar, 1e-6), 1.0 - 1e-6);
  start[0] = std::log(clipped / (1.0 - clipped));
  return {newton_minimize(value, grad, hess, start)};
}

double CumulativeLogitObjective::value(const Eigen::VectorXd& params) const {
  const int cuts = levels - 1;
  for (int k = 1; k < cuts; ++k)
    if (!(params[k] > params[k - 1])) return kInf;
  const Eigen::Index q = design.cols();
  const Eigen::VectorXd slope = params.tail(q);
  double nll = 0.5 * kRidge * slope.squaredNorm();
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(y.size()); ++i) {
    const double eta = q ? design.row(i).dot(slope) : 0.0;
    const int c = y[i];
    const double upper = c < cuts ? sigmoid(params[c] - eta) : 1.0;
    const double lower = c > 0 ? sigmoid(params[c - 1] - eta) : 0.0;
    const double d = upper - lower;
    if (!(d > 0.0)) return kInf;
    nll -= std::log(d);
  }
  return nll;
}

namespace {

inline double logistic_density(double t) {
  const double f = sigmoid(t);
  return f * (1.0 - f);
}

inline double logistic_density_derivative(double t) {
  const double f = sigmoid(t);
  return f * (1.0 - f) * (1.0 - 2.0 * f);
}

}  // namespace

Eigen::VectorXd CumulativeLogitObjective::gradient(const Eigen::VectorXd& params) const {
  const int cuts = levels - 1;
  const Eigen::Index q = design.cols();
  const Eigen::VectorXd slope = params.tail(q);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(y.size()); ++i) {
    const double eta = q ? design.row(i).dot(slope) : 0.0;
    const int c = y[i];
    const bool has_upper = c < cuts;
    const bool has_lower = c > 0;
    const double a = has_upper ? params[c] - eta : 0.0;
    const double b = has_lower ? params[c - 1] - eta : 0.0;
    const double fa = has_upper ? logistic_density(a) : 0.0;
    const double fb = has_lower ? logistic_density(b) : 0.0;
    const double d = (has_upper ? sigmoid(a) : 1.0) - (has_lower ? sigmoid(b) : 0.0);
    // log-likelihood derivatives, negated below
    if (has_upper) g[c] -= fa / d;
    if (has_lower) g[c - 1] += fb / d;
    const double deta = -(fa - fb) / d;
    if (q) g.tail(q) -= deta * design.row(i).transpose();
  }
  g.tail(q) += kRidge * slope;
  return g;
}

Eigen::MatrixXd CumulativeLogitObjective::hessian(const Eigen::VectorXd& params) const {
  const int cuts = levels - 1;
  const Eigen::Index q = design.cols();
  const Eigen::VectorXd slope = params.tail(q);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(params.size(), params.size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(y.size()); ++i) {
    const double eta = q ? design.row(i).dot(slope) : 0.0;
    const int c = y[i];
    const bool has_upper = c < cuts;
    const bool has_lower = c > 0;
    const double a = has_upper ? params[c] - eta : 0.0;
    const double b = has_lower ? params[c - 1] - eta : 0.0;
    const double fa = has_upper ? logistic_density(a) : 0.0;
    const double fb = has_lower ? logistic_density(b) : 0.0;
    const double dfa = has_upper ? logistic_density_derivative(a) : 0.0;
    const double dfb = has_lower ? logistic_density_derivative(b) : 0.0;
    const double d = (has_upper ? sigmoid(a) : 1.0) - (has_lower ? sigmoid(b) : 0.0);
    const double d2 = d * d;
    // Second derivatives of log(d) w.r.t. (upper cut, lower cut, eta).
    const double l_uu = dfa / d - fa * fa / d2;
    const double l_ll = -dfb / d - fb * fb / d2;
    const double l_ul = fa * fb / d2;
    const double l_ue = -dfa / d + fa * (fa - fb) / d2;
    const double l_le = dfb / d - fb * (fa - fb) / d2;
    const double l_ee = (dfa - dfb) / d - (fa - fb) * (fa - fb) / d2;
    if (has_upper) h(c, c) -= l_uu;
    if (has_lower) h(c - 1, c - 1) -= l_ll;
    if (has_upper && has_lower) {
      h(c, c - 1) -= l_ul;
      h(c - 1, c) -= l_ul;
    }
    if (q) {
      const Eigen::VectorXd x = design.row(i).transpose();
      h.bottomRightCorner(q, q) -= l_ee * x * x.transpose();
      if (has_upper) {
        h.block(cuts, c, q, 1) -= l_ue * x;
        h.block(c, cuts, 1, q) -= l_ue * x.transpose();
      }
      if (has_lower) {
        h.block(cuts, c - 1, q, 1) -= l_le * x;
        h.block(c - 1, cuts, 1, q) -= l_le * x.transpose();
      }
    }
  }
  for (Eigen::Index k = 0; k < q; ++k) h(cuts + k, cuts + k) += kRidge;
  return h;
}

CumulativeLogitFit fit_cumulative_logit(const Eigen::MatrixXd& design, std::span<const int> y,
                                        int levels) {
  if (levels < 2) throw ValidationError("cumulative logit needs at least two levels");
  const int cuts = levels - 1;
  const Eigen::Index q = design.cols();
  // Start from smoothed marginal cumulative frequencies.
  std::vector<double> counts(levels, 0.5);
  for (int c : y) counts[c] += 1.0;
  double total = 0.0;
  for (double c : counts) total += c;
  Eigen::VectorXd start = Eigen::VectorXd::Zero(cuts + q);
  double cum = 0.0;
  for (int k = 0; k < cuts; ++k) {
    cum += counts[k];
    const double p = cum / total;
    start[k] = std::log(p / (1.0 - p));
  }
  CumulativeLogitObjective objective{design, y, levels};
  const Eigen::VectorXd x = newton_minimize(
      [&](const Eigen::VectorXd& v) { return objective.value(v); },
      [&](const Eigen::VectorXd& v) { return objective.gradient(v); },
      [&](const Eigen::VectorXd& v) {
        Eigen::MatrixXd h = objective.hessian(v);
        // Empty levels push adjacent cut-points together; keep the system solvable.
        for (int k = 0; k < cuts; ++k) h(k, k) += 1e-10;
        return h;
      },
      start);
  return {x.head(cuts), x.tail(q)};
}

void cumulative_logit_probs(const CumulativeLogitFit& fit, double eta, std::vector<double>& out) {
  const Eigen::Index cuts = fit.thresholds.size();
  out.resize(cuts + 1);
  double prev = 0.0;
  for (Eigen::Index k = 0; k < cuts; ++k) {
    const double c = sigmoid(fit.thresholds[k] - eta);
    out[k] = std::max(c - prev, 0.0);
    prev = std::max(prev, c);
  }
  out[cuts] = std::max(1.0 - prev, 0.0);
}

MultinomialFit fit_multinomial(const Eigen::MatrixXd& design, std::span<const int> y, int levels) {
  const Eigen::Index p = design.cols();
  const Eigen::Index k1 = levels - 1;
  const Eigen::Index n = design.rows();
  auto unpack = [&](const Eigen::VectorXd& v) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), p, k1);  // column per class
  };
  auto probs = [&](const Eigen::MatrixXd& coef, Eigen::Index i, Eigen::VectorXd& pi) {
    Eigen::VectorXd eta = (design.row(i) * coef).transpose();
    const double mx = std::max(0.0, eta.maxCoeff());
    double denom = std::exp(-mx);
    for (Eigen::Index k = 0; k < k1; ++k) {
      eta[k] = std::exp(eta[k] - mx);
      denom += eta[k];
    }
    pi = eta / denom;
    return std::log(denom) + mx;  // log normalizer
  };
  auto penalty = [&](const Eigen::VectorXd& v) {
    const auto coef = unpack(v);
    return 0.5 * kRidge * coef.bottomRows(p - 1).squaredNorm();
  };
  auto value = [&](const Eigen::VectorXd& v) {
    const Eigen::MatrixXd coef = unpack(v);
    Eigen::VectorXd pi;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lognorm = probs(coef, i, pi);
      const double eta_y = y[i] > 0 ? design.row(i).dot(coef.col(y[i] - 1)) : 0.0;
      nll += lognorm - eta_y;
    }
    return nll + penalty(v);
  };
  auto grad = [&](const Eigen::VectorXd& v) {
    const Eigen::MatrixXd coef = unpack(v);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, k1);
    Eigen::VectorXd pi;
    for (Eigen::Index i = 0; i < n; ++i) {
      probs(coef, i, pi);
      for (Eigen::Index k = 0; k < k1; ++k) {
        const double r = pi[k] - (y[i] == k + 1 ? 1.0 : 0.0);
        g.col(k) += r * design.row(i).transpose();
      }
    }
    g.bottomRows(p - 1) += kRidge * coef.bottomRows(p - 1);
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(g.data(), p * k1));
  };
  auto hess = [&](const Eigen::VectorXd& v) {
    const Eigen::MatrixXd coef = unpack(v);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p * k1, p * k1);
    Eigen::VectorXd pi;
    for (Eigen::Index i = 0; i < n; ++i) {
      probs(coef, i, pi);
      const Eigen::VectorXd x = design.row(i).transpose();
      const Eigen::MatrixXd xx = x * x.transpose();
      for (Eigen::Index a = 0; a < k1; ++a)
        for (Eigen::Index b = 0; b < k1; ++b) {
          const double w = (a == b ? pi[a] : 0.0) - pi[a] * pi[b];
          h.block(a * p, b * p, p, p) += w * xx;
        }
    }
    for (Eigen::Index a = 0; a < k1; ++a)
      for (Eigen::Index k = 0; k < p; ++k) h(a * p + k, a * p + k) += (k == 0 ? 1e-10 : kRidge);
    return h;
  };
  Eigen::VectorXd start = Eigen::VectorXd::Zero(p * k1);
  std::vector<double> counts(levels, 0.5);
  for (int c : y) counts[c] += 1.0;
  for (Eigen::Index k = 0; k < k1; ++k) start[k * p] = std::log(counts[k + 1] / counts[0]);
  const Eigen::VectorXd x = newton_minimize(value, grad, hess, start);
  MultinomialFit fit;
  fit.coef = unpack(x).transpose();
  return fit;
}

}  // namespace synthdebias::glm
