#include "synthdebias/quality.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "synthdebias/errors.hpp"

namespace synthdebias {

namespace {

void check_schemas(const Table& a, const Table& b) {
  if (a.schema().columns().size() != b.schema().columns().size())
    throw ValidationError("quality: schemas differ in column count");
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const auto& ca = a.schema().columns()[j];
    const auto& cb = b.schema().columns()[j];
    if (ca.name != cb.name || ca.kind != cb.kind)
      throw ValidationError("quality: schemas differ at column " + ca.name);
  }
}

double kl(const std::vector<double>& p_counts, const std::vector<double>& q_counts) {
  double p_total = 0.0, q_total = 0.0;
  for (double c : p_counts) p_total += c + 1.0;
  for (double c : q_counts) q_total += c + 1.0;
  double out = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    const double p = (p_counts[i] + 1.0) / p_total;
    const double q = (q_counts[i] + 1.0) / q_total;
    out += p * std::log(p / q);
  }
  return std::max(out, 0.0);
}

}  // namespace

double ikld(const Table& original, const Table& synthetic, std::size_t bins,
            std::map<std::string, double>* per_column) {
  check_schemas(original, synthetic);
  if (original.rows() == 0 || synthetic.rows() == 0)
    throw ValidationError("quality: empty table");
  if (bins < 1) throw ValidationError("quality: bins must be >= 1");
  if (original.cols() == 0) return 1.0;

  double total = 0.0;
  for (std::size_t j = 0; j < original.cols(); ++j) {
    const auto& spec = original.schema().columns()[j];
    const auto a = original.column(j);
    const auto b = synthetic.column(j);
    std::size_t cells;
    std::function<std::size_t(double)> cell;
    if (spec.kind.kind() == Kind::kContinuous) {
      const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
      const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
      const double lo = std::min(*amin, *bmin);
      const double hi = std::max(*amax, *bmax);
      const double width = (hi - lo) / static_cast<double>(bins);
      cells = bins;
      cell = [=](double v) {
        if (!(width > 0.0)) return std::size_t{0};
        const auto i = static_cast<std::size_t>((v - lo) / width);
        return std::min(i, bins - 1);
      };
    } else {
      cells = spec.kind.level_count();
      cell = [](double v) { return static_cast<std::size_t>(v); };
    }
    std::vector<double> pa(cells, 0.0), pb(cells, 0.0);
    for (double v : a) pa[cell(v)] += 1.0;
    for (double v : b) pb[cell(v)] += 1.0;
    const double d = kl(pa, pb);
    if (per_column) (*per_column)[spec.name] = d;
    total += d;
  }
  return 1.0 / (1.0 + total / static_cast<double>(original.cols()));
}

std::size_t count_exact_copies(const Table& original, const Table& synthetic) {
  check_schemas(original, synthetic);
  const std::size_t d = original.cols();
  auto row_bits = [d](const Table& t, std::size_t i) {
    std::vector<std::uint64_t> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = std::bit_cast<std::uint64_t>(t.at(i, j) + 0.0);
    return row;
  };
  std::set<std::vector<std::uint64_t>> seen;
  for (std::size_t i = 0; i < original.rows(); ++i) seen.insert(row_bits(original, i));
  std::size_t count = 0;
  for (std::size_t i = 0; i < synthetic.rows(); ++i)
    if (seen.count(row_bits(synthetic, i))) ++count;
  return count;
}

QualityReport assess_quality(const Table& original, const Table& synthetic, std::size_t bins) {
  QualityReport report;
  report.ikld = ikld(original, synthetic, bins, &report.per_column_kl);
  report.exact_copies = count_exact_copies(original, synthetic);
  return report;
}

}  // namespace synthdebias
