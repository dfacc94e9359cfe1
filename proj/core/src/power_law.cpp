#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "synthdebias/errors.hpp"
#include "synthdebias/harness.hpp"

namespace synthdebias {

PowerLawFit fit_power_law(std::span<const double> n_values, std::span<const double> ses,
                          double level) {
  if (n_values.size() != ses.size()) throw ValidationError("power law: length mismatch");
  const std::size_t k = n_values.size();
  if (k < 3) throw ValidationError("power law: need at least 3 points");
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(n_values[i] > 0.0) || !(ses[i] > 0.0))
      throw ValidationError("power law: n and SE must be positive");
    x[i] = std::log(n_values[i]);
    y[i] = std::log(ses[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("power law: n values must differ");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = y[i] - intercept - slope * x[i];
    rss += e * e;
  }
  const double df = static_cast<double>(k - 2);
  const double se_slope = std::sqrt(rss / df / sxx);
  const boost::math::students_t dist(df);
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);

  PowerLawFit fit;
  fit.a = -slope;
  fit.a_low = fit.a - t * se_slope;
  fit.a_high = fit.a + t * se_slope;
  fit.log_c = intercept;
  fit.points = k;
  return fit;
}

}  // namespace synthdebias
