#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthdebias/config.hpp"
#include "synthdebias/csv.hpp"
#include "synthdebias/errors.hpp"
#include "synthdebias/serialize.hpp"

using namespace synthdebias;
namespace fs = std::filesystem;

namespace {

std::string validation_message(const std::string& text) {
  try {
    parse_study_config(text, ".", "study.cfg");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "synthdebias_unit_cli";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const fs::path dir = scratch();
  const std::string cmd = std::string("\"") + SYNTHDEBIAS_CLI + "\" " + args + " >\"" +
                          (dir / "stdout.txt").string() + "\" 2>\"" + (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

const char* kXySchema =
    "columns:\n"
    "  - {name: x, kind: categorical, levels: [s0, s1]}\n"
    "  - {name: a, kind: continuous}\n"
    "  - {name: y, kind: continuous}\n";

// 99 rows in s0 and one in s1.
std::string xy_csv() {
  std::ostringstream out;
  out << "x,a,y\n";
  for (int i = 0; i < 100; ++i) out << (i == 57 ? "s1" : "s0") << "," << i % 7 << "," << i % 5 << "\n";
  return out.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_study_config(
      "study:\n"
      "  seed: 7\n"
      "  n_grid: [20, 40, 80]\n"
      "  runs: 5\n"
      "  m: 1000\n"
      "  methods: [eic]\n"
      "debias: {k_large: 5000, k_cond: 100, strict: false}\n"
      "generators: [parametric, \"smoothed_bootstrap:bandwidth=2\"]\n"
      "estimands:\n"
      "  - mean:age\n"
      "  - {spec: \"lincoef:bp~therapy|stage\", debias: false}\n"
      "truth: {\"mean:age\": 51.5}\n",
      ".");
  CHECK(c.seed == 7);
  CHECK(c.n_grid == std::vector<std::size_t>{20, 40, 80});
  CHECK(c.m_rule.kind == MRule::Kind::kFixed);
  CHECK(c.m_rule.m_for(20) == 1000);
  CHECK(c.methods == std::vector<Method>{Method::kEic});
  CHECK(c.debias.k_large == 5000);
  CHECK_FALSE(c.debias.strict);
  REQUIRE(c.generators.size() == 2);
  CHECK(c.generators[1].bandwidth_rule == 2.0);
  REQUIRE(c.estimands.size() == 2);
  CHECK_FALSE(c.estimands[1].debias);
  CHECK(c.truth.at("mean:age") == 51.5);
}

TEST_CASE("config errors name the file and line") {
  const std::string base = "study:\n  n_grid: [50, 160]\nestimands: [mean:age]\n";
  CHECK(validation_message(base).empty());
  const auto unknown = validation_message("study:\n  n_grid: [50]\n  colour: red\nestimands: [mean:age]\n");
  CHECK(unknown.find("study.cfg:3:") == 0);
  CHECK(unknown.find("colour") != std::string::npos);
  const auto order = validation_message("study:\n  n_grid: [160, 50]\nestimands: [mean:age]\n");
  CHECK(order.find("study.cfg:") == 0);
  CHECK(order.find("n_grid") != std::string::npos);
  CHECK(validation_message("estimands: [mean:age]\ngenerators: [gan]\n").find("study.cfg:2:") == 0);
  CHECK_FALSE(validation_message("estimands: [\"mean:nope\"]\n").empty());
  CHECK_FALSE(validation_message("study: [1, 2\n").empty());
}

TEST_CASE("schema YAML round trip") {
  const Schema s({{"age", ColumnKind::continuous()},
                  {"t", ColumnKind::binary()},
                  {"stage", ColumnKind::ordinal({"I", "II", "III"})},
                  {"sex", ColumnKind::categorical({"F", "M"})}});
  CHECK(parse_schema(schema_to_yaml(s)) == s);
  CHECK_THROWS_AS(parse_schema("columns:\n  - {name: a, kind: ordinal}\n"), ValidationError);
  CHECK_THROWS_AS(parse_schema("columns:\n  - {name: a, kind: weird}\n"), ValidationError);
}

TEST_CASE("golden CSV headers") {
  CHECK(std::string(kRunsCsvHeader) ==
        "n,generator,data_kind,estimand,method,run,truth,theta,se_mle,se_mle_corrected,se_eic,"
        "ci_low,ci_high,m,covered,failure,debias_shift,debias_residual,message");
  CHECK(std::string(kSummaryCsvHeader) ==
        "n,generator,data_kind,estimand,method,truth,mean_estimate,bias,empirical_se,"
        "avg_model_se,coverage,mean_ci_width,n_valid,n_failed");
  CHECK(std::string(kConvergenceCsvHeader) ==
        "generator,data_kind,estimand,method,a,a_low,a_high,log_c,points");
}

TEST_CASE("convergence from a summary CSV") {
  std::istringstream ok("n,empirical_se,generator\n100,0.1,g\n400,0.05,g\n1600,0.025,g\n");
  const auto fits = convergence_from_summary_csv(ok);
  REQUIRE(fits.size() == 1);
  CHECK(fits.begin()->second.a == doctest::Approx(0.5).epsilon(1e-12));
  std::istringstream short_series("n,empirical_se\n100,0.1\n400,0.05\n");
  CHECK_THROWS_AS(convergence_from_summary_csv(short_series), ValidationError);
}

TEST_CASE("CLI exit codes and outputs") {
  const fs::path dir = scratch();
  write(dir / "xy.schema.yaml", kXySchema);
  write(dir / "xy.csv", xy_csv());
  const std::string data = "--data \"" + (dir / "xy.csv").string() + "\" --schema \"" +
                           (dir / "xy.schema.yaml").string() + "\"";

  CHECK(cli("") == 2);
  CHECK(cli("bogus") == 2);

  write(dir / "bad.cfg", "study:\n  n_grid: [500, 50]\nestimands: [mean:age]\n");
  CHECK(cli("simulate --config \"" + (dir / "bad.cfg").string() + "\" --out \"" +
            (dir / "sim").string() + "\"") == 2);
  CHECK(slurp(dir / "stderr.txt").find("n_grid") != std::string::npos);

  CHECK(cli("analyze " + data + " --estimand mean:a") == 0);
  CHECK(slurp(dir / "stdout.txt").find("\"theta\"") != std::string::npos);
  CHECK(cli("analyze " + data + " --estimand mean:a --kind debiased") == 2);
  CHECK(cli("analyze " + data + " --estimand mean:a --kind debiased --n 100") == 0);

  // Two bootstrap centres almost never include the lone s1 row, so its
  // stratum is unreachable and strict mode raises a domain error.
  const std::string deb = "debias " + data +
                          " --generator smoothed_bootstrap:bandwidth=0,centres=0.1"
                          " --estimand \"lincoef:y~a|x\" --m 50 --k-large 1000 --k-cond 10 --out \"" +
                          (dir / "deb").string() + "\"";
  CHECK(cli(deb) == 3);
  CHECK(slurp(dir / "stderr.txt").find("x=s1") != std::string::npos);
  CHECK(cli(deb + " --lenient") == 0);
  CHECK(fs::exists(dir / "deb" / "debias_report.json"));
  CHECK(slurp(dir / "deb" / "debias_report.json").find("warnings") != std::string::npos);

  write(dir / "two.csv", "n,empirical_se\n100,0.1\n400,0.05\n");
  CHECK(cli("convergence --summary \"" + (dir / "two.csv").string() + "\"") == 2);
  CHECK(cli("convergence --summary \"" + (dir / "missing.csv").string() + "\"") == 1);

  CHECK(cli("quality --original \"" + (dir / "xy.csv").string() + "\" --synthetic \"" +
            (dir / "xy.csv").string() + "\" --schema \"" + (dir / "xy.schema.yaml").string() + "\"") == 0);
  const std::string q = slurp(dir / "stdout.txt");
  CHECK(q.find("\"ikld\": 1.0") != std::string::npos);
  CHECK(q.find("\"exact_copies\": 100") != std::string::npos);
}
