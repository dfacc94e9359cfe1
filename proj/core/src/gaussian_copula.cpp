#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthdebias/generators.hpp"

namespace synthdebias {

namespace {

// Normal scores from average ranks: z = Phi^-1(rank / (n + 1)).
std::vector<double> continuous_scores(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k + 1 < n && v[order[k + 1]] == v[order[i]]) ++k;
    const double rank = 0.5 * static_cast<double>(i + k) + 1.0;
    const double score = normal_quantile(rank / static_cast<double>(n + 1));
    for (std::size_t t = i; t <= k; ++t) z[order[t]] = score;
    i = k + 1;
  }
  return z;
}

}  // namespace

GaussianCopulaGenerator::GaussianCopulaGenerator(const Table& train,
                                                 std::vector<std::string>* warnings)
    : schema_(train.schema()), train_n_(train.rows()) {
  const std::size_t d = train.cols();
  const std::size_t n = train.rows();
  sorted_.resize(d);
  cumulative_.resize(d);

  Eigen::MatrixXd scores(n, d);
  std::vector<bool> degenerate(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = train.column(j);
    const auto& kind = schema_[j].kind;
    if (kind.kind() == Kind::kContinuous) {
      sorted_[j].assign(col.begin(), col.end());
      std::sort(sorted_[j].begin(), sorted_[j].end());
      degenerate[j] = sorted_[j].front() == sorted_[j].back();
      const auto z = continuous_scores(col);
      for (std::size_t i = 0; i < n; ++i) scores(i, j) = z[i];
    } else {
      std::vector<double> counts(kind.level_count(), 0.0);
      for (double v : col) counts[static_cast<std::size_t>(v)] += 1.0;
      auto& cum = cumulative_[j];
      cum.resize(counts.size());
      double acc = 0.0;
      std::size_t observed = 0;
      for (std::size_t k = 0; k < counts.size(); ++k) {
        acc += counts[k] / static_cast<double>(n);
        cum[k] = acc;
        if (counts[k] > 0) ++observed;
      }
      cum.back() = 1.0;
      degenerate[j] = observed <= 1;
      // Midpoint of each level's probability interval.
      for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(col[i]);
        const double lo = k == 0 ? 0.0 : cum[k - 1];
        scores(i, j) = normal_quantile(0.5 * (lo + cum[k]));
      }
    }
    if (degenerate[j] && warnings)
      warnings->push_back("gaussian_copula: column " + schema_[j].name +
                          " has zero variance; sampled independently");
  }

  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
  if (n >= 2) {
    const Eigen::RowVectorXd mean = scores.colwise().mean();
    const Eigen::MatrixXd centred = scores.rowwise() - mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        if (a == b || degenerate[a] || degenerate[b] || cov(a, a) <= 0 || cov(b, b) <= 0) continue;
        corr(a, b) = cov(a, b) / std::sqrt(cov(a, a) * cov(b, b));
      }
  }
  // Perfectly collinear scores make the matrix singular; shrink toward I.
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  for (double jitter = 1e-10; llt.info() != Eigen::Success || !llt.matrixL().toDenseMatrix().allFinite();
       jitter *= 10.0) {
    Eigen::MatrixXd adjusted = corr * (1.0 - jitter);
    adjusted.diagonal().setOnes();
    llt.compute(adjusted);
    if (jitter > 1.0) break;
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  correlation_.resize(d * d);
  cholesky_.resize(d * d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      correlation_[a * d + b] = corr(a, b);
      cholesky_[a * d + b] = lower(a, b);
    }
}

double GaussianCopulaGenerator::inverse_marginal(std::size_t column, double u) const {
  if (schema_[column].kind.kind() == Kind::kContinuous) {
    const auto& s = sorted_[column];
    // Linear interpolation of order statistics at position u*(n+1) - 1.
    const double pos = std::clamp(u * static_cast<double>(s.size() + 1) - 1.0, 0.0,
                                  static_cast<double>(s.size() - 1));
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return s[lo] + w * (s[hi] - s[lo]);
  }
  const auto& cum = cumulative_[column];
  const auto it = std::lower_bound(cum.begin(), cum.end(), u);
  return static_cast<double>(std::min<std::size_t>(it - cum.begin(), cum.size() - 1));
}

Table GaussianCopulaGenerator::sample(std::size_t m, Rng& rng) const {
  const std::size_t d = schema_.size();
  std::vector<std::vector<double>> out(d, std::vector<double>(m));
  std::vector<double> eps(d);
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& e : eps) e = rng.normal();
    for (std::size_t a = 0; a < d; ++a) {
      double z = 0.0;
      for (std::size_t b = 0; b <= a; ++b) z += cholesky_[a * d + b] * eps[b];
      out[a][i] = inverse_marginal(a, normal_cdf(z));
    }
  }
  return Table(schema_, std::move(out));
}

}  // namespace synthdebias
