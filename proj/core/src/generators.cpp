#include "synthdebias/generators.hpp"

#include <cmath>
#include <sstream>

#include "synthdebias/errors.hpp"

namespace synthdebias {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_param(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("generator parameter " + key + ": not a number: '" + value + "'");
  }
}

}  // namespace

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = trim(text.substr(0, colon));
  GeneratorSpec spec;
  if (name == "parametric") {
    spec = parametric();
  } else if (name == "smoothed_bootstrap") {
    spec = smoothed_bootstrap(1.0);
  } else if (name == "gaussian_copula") {
    spec = gaussian_copula();
  } else {
    throw ValidationError("unknown generator: '" + name + "'");
  }
  if (colon != std::string::npos) {
    std::stringstream params(text.substr(colon + 1));
    std::string item;
    while (std::getline(params, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ValidationError("generator parameter without '=': " + item);
      const std::string key = trim(item.substr(0, eq));
      const std::string value = trim(item.substr(eq + 1));
      if (spec.type != Type::kSmoothedBootstrap)
        throw ValidationError("generator " + name + " takes no parameters");
      if (key == "bandwidth")
        spec.bandwidth_rule = parse_param(key, value);
      else if (key == "centres")
        spec.centres_exponent = parse_param(key, value);
      else
        throw ValidationError("unknown smoothed_bootstrap parameter: " + key);
    }
  }
  spec.validate();
  return spec;
}

std::string GeneratorSpec::label() const {
  switch (type) {
    case Type::kParametric: return "parametric";
    case Type::kGaussianCopula: return "gaussian_copula";
    case Type::kSmoothedBootstrap: {
      std::ostringstream out;
      out << "smoothed_bootstrap:bandwidth=" << bandwidth_rule << ",centres=" << centres_exponent;
      return out.str();
    }
  }
  return "unknown";
}

void GeneratorSpec::validate() const {
  if (type == Type::kSmoothedBootstrap) {
    if (!(bandwidth_rule >= 0.0) || !std::isfinite(bandwidth_rule))
      throw ValidationError("smoothed_bootstrap bandwidth must be >= 0");
    if (!(centres_exponent > 0.0 && centres_exponent <= 1.0))
      throw ValidationError("smoothed_bootstrap centres exponent must lie in (0, 1]");
  }
}

Table FittedGenerator::conditional_sample(const Assignment& assignment, std::size_t m,
                                          Rng& rng) const {
  return conditional_sample_rejection(*this, assignment, m, rng);
}

Table conditional_sample_rejection(const FittedGenerator& gen, const Assignment& assignment,
                                   std::size_t m, Rng& rng, RejectionLimits limits) {
  const auto conditions = resolve(gen.schema(), assignment);
  if (m == 0) return Table::empty(gen.schema());
  const std::size_t batch = limits.batch ? limits.batch : 10 * m;
  const std::size_t max_draws = limits.max_draws ? limits.max_draws : 1000 * m;

  std::vector<std::vector<double>> out(gen.schema().size());
  for (auto& c : out) c.reserve(m);
  std::size_t found = 0;
  std::size_t draws = 0;
  while (found < m) {
    if (draws >= max_draws)
      throw ConditionTooRare(describe(gen.schema(), assignment), draws, found);
    const std::size_t want = std::min(batch, max_draws - draws);
    const Table t = gen.sample(want, rng);
    draws += want;
    for (std::size_t r = 0; r < t.rows() && found < m; ++r) {
      bool ok = true;
      for (const auto& [j, level] : conditions)
        if (t.at(r, j) != level) {
          ok = false;
          break;
        }
      if (!ok) continue;
      for (std::size_t j = 0; j < out.size(); ++j) out[j].push_back(t.at(r, j));
      ++found;
    }
  }
  return Table(gen.schema(), std::move(out));
}

Table sample_conditional(const FittedGenerator& gen, const Assignment& assignment,
                         std::size_t m, Rng& rng) {
  if (gen.supports_conditional()) return gen.conditional_sample(assignment, m, rng);
  return conditional_sample_rejection(gen, assignment, m, rng);
}

GeneratorPtr fit_generator(const GeneratorSpec& spec, const Table& train, Rng& rng,
                           std::vector<std::string>* warnings) {
  spec.validate();
  if (train.rows() == 0) throw ValidationError("cannot fit a generator on an empty table");
  switch (spec.type) {
    case GeneratorSpec::Type::kParametric:
      return std::make_shared<ParametricGenerator>(train);
    case GeneratorSpec::Type::kSmoothedBootstrap:
      return std::make_shared<SmoothedBootstrapGenerator>(train, spec.bandwidth_rule,
                                                          spec.centres_exponent, rng);
    case GeneratorSpec::Type::kGaussianCopula:
      return std::make_shared<GaussianCopulaGenerator>(train, warnings);
  }
  throw ValidationError("unsupported generator");
}

}  // namespace synthdebias
