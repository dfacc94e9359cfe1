#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include "synthdebias/debias.hpp"
#include "synthdebias/harness.hpp"
#include "synthdebias/inference.hpp"
#include "synthdebias/quality.hpp"

namespace synthdebias {

// runs.csv: one record per row, in record_less order.
//   n,generator,data_kind,estimand,method,run,truth,theta,se_mle,se_mle_corrected,
//   se_eic,ci_low,ci_high,m,covered,failure,debias_shift,debias_residual,message
// Numeric fields of failed records are empty.
extern const char* const kRunsCsvHeader;
void write_runs_csv(std::ostream& out, std::span<const RunRecord> records);

// summary.csv: one row per cell.
//   n,generator,data_kind,estimand,method,truth,mean_estimate,bias,empirical_se,
//   avg_model_se,coverage,mean_ci_width,n_valid,n_failed
extern const char* const kSummaryCsvHeader;
void write_summary_csv(std::ostream& out, const StudySummary& summary);

// convergence.csv: generator,data_kind,estimand,method,a,a_low,a_high,log_c,points
extern const char* const kConvergenceCsvHeader;
void write_convergence_csv(std::ostream& out, const StudySummary& summary);

std::string summary_json(const StudySummary& summary, const StudyConfig& config);
std::string config_json(const StudyConfig& config);
std::string estimate_report_json(const EstimateReport& report, const EstimatorFit* fit = nullptr);
std::string debias_report_json(const DebiasReport& report);
std::string quality_report_json(const QualityReport& report);
std::string power_law_json(const std::map<std::string, PowerLawFit>& fits);

// Reads a CSV with columns n and empirical_se; any of generator, data_kind,
// estimand, method present split the rows into series keyed by their values
// joined with '/'. Every series needs at least three rows.
std::map<std::string, PowerLawFit> convergence_from_summary_csv(std::istream& in);

// manifest.json: config echo, tool version, seed, timestamps, and sha256 of
// each listed file (name relative to dir).
std::string manifest_json(const StudyConfig& config, const std::filesystem::path& dir,
                          std::span<const std::string> files, const std::string& started,
                          const std::string& finished);

std::string utc_timestamp();
const char* version();

}  // namespace synthdebias
