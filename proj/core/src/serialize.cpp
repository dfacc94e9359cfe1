#include "synthdebias/serialize.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "synthdebias/csv.hpp"
#include "synthdebias/digest.hpp"
#include "synthdebias/errors.hpp"

namespace synthdebias {

using nlohmann::ordered_json;

const char* const kRunsCsvHeader =
    "n,generator,data_kind,estimand,method,run,truth,theta,se_mle,se_mle_corrected,se_eic,"
    "ci_low,ci_high,m,covered,failure,debias_shift,debias_residual,message";
const char* const kSummaryCsvHeader =
    "n,generator,data_kind,estimand,method,truth,mean_estimate,bias,empirical_se,avg_model_se,"
    "coverage,mean_ci_width,n_valid,n_failed";
const char* const kConvergenceCsvHeader =
    "generator,data_kind,estimand,method,a,a_low,a_high,log_c,points";

const char* version() { return SYNTHDEBIAS_VERSION; }

namespace {

std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = c == ',' ? ';' : ' ';
  return s;
}

ordered_json to_json(const PowerLawFit& f) {
  return {{"a", jnum(f.a)},
          {"a_ci", {jnum(f.a_low), jnum(f.a_high)}},
          {"log_c", jnum(f.log_c)},
          {"points", f.points}};
}

ordered_json to_json(const StudyConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["n_grid"] = c.n_grid;
  j["runs"] = c.runs;
  j["m"] = c.m_rule.kind == MRule::Kind::kFixed ? ordered_json(c.m_rule.fixed)
                                                : ordered_json("equal_to_n");
  j["nuisance_folds"] = c.nuisance_folds;
  auto& methods = j["methods"] = ordered_json::array();
  for (Method m : c.methods) methods.push_back(m == Method::kMle ? "mle" : "eic");
  j["level"] = c.level;
  j["debias"] = {{"k_large", c.debias.k_large},
                 {"k_cond", c.debias.k_cond},
                 {"strict", c.debias.strict},
                 {"verify", c.debias.verify},
                 {"split_folds", c.debias.split_folds}};
  if (c.population) {
    j["data"] = {{"population_rows", c.population->rows()}};
  } else {
    const auto& d = c.dgp;
    j["data"] = {{"dgp",
                  {{"mean_age", d.mean_age},
                   {"sd_age", d.sd_age},
                   {"nu_intercepts", d.nu_intercepts},
                   {"nu_age", d.nu_age},
                   {"p_therapy", d.p_therapy},
                   {"beta_stage", d.beta_stage},
                   {"beta_therapy", d.beta_therapy},
                   {"baseline_bp", d.baseline_bp},
                   {"sd_bp", d.sd_bp}}}};
  }
  auto& gens = j["generators"] = ordered_json::array();
  for (const auto& g : c.generators) gens.push_back(g.label());
  auto& ests = j["estimands"] = ordered_json::array();
  for (const auto& e : c.estimands) ests.push_back({{"spec", e.spec.to_string()}, {"debias", e.debias}});
  j["truth"] = ordered_json::object();
  for (const auto& [k, v] : c.truth) j["truth"][k] = v;
  return j;
}

}  // namespace

void write_runs_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << kRunsCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.n << ',' << r.generator << ',' << data_kind_name(r.data_kind) << ',' << r.estimand
        << ',' << method_name(r.method) << ',' << r.run << ',' << num(r.truth) << ',';
    if (r.report) {
      const auto& p = *r.report;
      out << num(p.theta) << ',' << num(p.se_mle) << ',' << num(p.se_mle_corrected) << ','
          << num(p.se_eic) << ',' << num(p.ci.low) << ',' << num(p.ci.high) << ',' << p.m << ','
          << (r.covered ? 1 : 0) << ',';
    } else {
      out << ",,,,,,,,";
    }
    out << failure_name(r.failure) << ',' << num(r.debias_shift) << ','
        << num(r.debias_residual) << ',' << clean(r.message) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const StudySummary& summary) {
  out << kSummaryCsvHeader << '\n';
  for (const auto& c : summary.cells) {
    out << c.key.n << ',' << c.key.generator << ',' << data_kind_name(c.key.data_kind) << ','
        << c.key.estimand << ',' << method_name(c.key.method) << ',' << num(c.truth) << ','
        << num(c.mean_estimate) << ',' << num(c.bias) << ',' << num(c.empirical_se) << ','
        << num(c.avg_model_se) << ',' << num(c.coverage) << ',' << num(c.mean_ci_width) << ','
        << c.n_valid << ',' << c.n_failed << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const StudySummary& summary) {
  out << kConvergenceCsvHeader << '\n';
  for (const auto& [k, f] : summary.convergence) {
    out << k.generator << ',' << data_kind_name(k.data_kind) << ',' << k.estimand << ','
        << method_name(k.method) << ',' << num(f.a) << ',' << num(f.a_low) << ','
        << num(f.a_high) << ',' << num(f.log_c) << ',' << f.points << '\n';
  }
}

std::string summary_json(const StudySummary& summary, const StudyConfig& config) {
  ordered_json j;
  j["config"] = to_json(config);
  auto& cells = j["cells"] = ordered_json::array();
  for (const auto& c : summary.cells) {
    cells.push_back({{"n", c.key.n},
                     {"generator", c.key.generator},
                     {"data_kind", data_kind_name(c.key.data_kind)},
                     {"estimand", c.key.estimand},
                     {"method", method_name(c.key.method)},
                     {"truth", jnum(c.truth)},
                     {"mean_estimate", jnum(c.mean_estimate)},
                     {"bias", jnum(c.bias)},
                     {"empirical_se", jnum(c.empirical_se)},
                     {"avg_model_se", jnum(c.avg_model_se)},
                     {"coverage", jnum(c.coverage)},
                     {"mean_ci_width", jnum(c.mean_ci_width)},
                     {"n_valid", c.n_valid},
                     {"n_failed", c.n_failed}});
  }
  auto& conv = j["convergence"] = ordered_json::array();
  for (const auto& [k, f] : summary.convergence) {
    auto entry = to_json(f);
    entry["generator"] = k.generator;
    entry["data_kind"] = data_kind_name(k.data_kind);
    entry["estimand"] = k.estimand;
    entry["method"] = method_name(k.method);
    conv.push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

std::string config_json(const StudyConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string estimate_report_json(const EstimateReport& r, const EstimatorFit* fit) {
  ordered_json j{{"estimand", r.estimand.to_string()},
                 {"data_kind", data_kind_name(r.data_kind)},
                 {"se_method", method_name(r.se_method)},
                 {"theta", jnum(r.theta)},
                 {"se_mle", jnum(r.se_mle)},
                 {"se_mle_corrected", jnum(r.se_mle_corrected)},
                 {"se_eic", jnum(r.se_eic)},
                 {"ci_low", jnum(r.ci.low)},
                 {"ci_high", jnum(r.ci.high)},
                 {"n", r.n},
                 {"m", r.m}};
  if (fit && !fit->arms.empty()) {
    auto& arms = j["arms"] = ordered_json::array();
    for (std::size_t g = 0; g < fit->arms.size(); ++g)
      arms.push_back({{"level", g}, {"count", fit->arms[g].count}, {"mean", jnum(fit->arms[g].mean)}});
  }
  if (fit && r.estimand.type == EstimandSpec::Type::kLinCoef) {
    j["denominator"] = jnum(fit->denominator);
    j["dropped_rows"] = fit->dropped_rows;
  }
  return j.dump(2) + "\n";
}

std::string debias_report_json(const DebiasReport& r) {
  ordered_json j{{"estimand", r.estimand.to_string()},
                 {"theta_hat_pn", jnum(r.theta_hat_pn)}};
  if (r.estimand.type == EstimandSpec::Type::kRiskDifference) {
    auto& arms = j["arms"] = ordered_json::array();
    for (std::size_t g = 0; g < r.arm_deltas.size(); ++g)
      arms.push_back({{"level", g}, {"theta_hat_pn", jnum(r.arm_theta[g])},
                      {"delta", jnum(r.arm_deltas[g])}});
  } else {
    j[r.estimand.type == EstimandSpec::Type::kMean ? "delta" : "b"] = jnum(r.shift);
  }
  j["k_large"] = r.k_large;
  j["k_cond"] = r.k_cond;
  j["residual_after_shift"] = jnum(r.residual_after_shift);
  j["relaxed_binary"] = r.relaxed_binary;
  j["split_folds"] = r.split_folds;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string quality_report_json(const QualityReport& r) {
  ordered_json j{{"ikld", jnum(r.ikld)}, {"exact_copies", r.exact_copies}};
  j["per_column_kl"] = ordered_json::object();
  for (const auto& [k, v] : r.per_column_kl) j["per_column_kl"][k] = jnum(v);
  return j.dump(2) + "\n";
}

std::string power_law_json(const std::map<std::string, PowerLawFit>& fits) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, f] : fits) j[k] = to_json(f);
  return j.dump(2) + "\n";
}

std::map<std::string, PowerLawFit> convergence_from_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("summary: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  std::ptrdiff_t n_col = -1, se_col = -1;
  std::vector<std::size_t> group_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& h = header[i];
    if (h == "n") n_col = static_cast<std::ptrdiff_t>(i);
    else if (h == "empirical_se") se_col = static_cast<std::ptrdiff_t>(i);
    else if (h == "generator" || h == "data_kind" || h == "estimand" || h == "method")
      group_cols.push_back(i);
  }
  if (n_col < 0 || se_col < 0) throw ValidationError("summary: needs columns n and empirical_se");

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("summary line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
    std::string key;
    for (std::size_t c : group_cols) key += (key.empty() ? "" : "/") + fields[c];
    if (key.empty()) key = "all";
    auto parse = [&](std::ptrdiff_t c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(fields[static_cast<std::size_t>(c)], &used);
        if (used != fields[static_cast<std::size_t>(c)].size()) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        throw ValidationError("summary line " + std::to_string(line_no) + ": bad number '" +
                              fields[static_cast<std::size_t>(c)] + "'");
      }
    };
    if (fields[static_cast<std::size_t>(se_col)].empty()) continue;
    auto& s = series[key];
    s.first.push_back(parse(n_col));
    s.second.push_back(parse(se_col));
  }
  if (series.empty()) throw ValidationError("summary: no data rows");
  std::map<std::string, PowerLawFit> out;
  for (const auto& [key, s] : series) {
    if (s.first.size() < 3)
      throw ValidationError("summary: series " + key + " has fewer than 3 rows");
    out[key] = fit_power_law(s.first, s.second);
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_json(const StudyConfig& config, const std::filesystem::path& dir,
                          std::span<const std::string> files, const std::string& started,
                          const std::string& finished) {
  ordered_json j;
  j["tool"] = "synthdebias";
  j["version"] = version();
  j["seed"] = config.seed;
  j["started"] = started;
  j["finished"] = finished;
  j["config"] = to_json(config);
  auto& inv = j["files"] = ordered_json::array();
  for (const auto& f : files) {
    const auto path = dir / f;
    inv.push_back({{"name", f},
                   {"bytes", std::filesystem::file_size(path)},
                   {"sha256", sha256_file(path)}});
  }
  return j.dump(2) + "\n";
}

}  // namespace synthdebias
