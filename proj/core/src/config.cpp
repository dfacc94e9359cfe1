#include "synthdebias/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "synthdebias/csv.hpp"
#include "synthdebias/errors.hpp"

namespace synthdebias {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                         const std::string& reason) const {
    std::string where = source_;
    if (node.IsDefined() && node.Mark().line >= 0) where += ":" + std::to_string(node.Mark().line + 1);
    throw ValidationError(where + ": " + field + ": " + reason);
  }

  void only_keys(const YAML::Node& map, const std::string& field,
                 const std::set<std::string>& allowed) const {
    if (!map.IsMap()) fail(map, field, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, field + "." + key, "unknown key");
    }
  }

  template <typename T>
  T get(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field, "cannot read '" + node.Scalar() + "'");
    }
  }

  template <typename T>
  void maybe(const YAML::Node& map, const char* key, const std::string& prefix, T& out) const {
    if (const auto node = map[key]) out = get<T>(node, prefix + key);
  }

  std::size_t count(const YAML::Node& node, const std::string& field) const {
    const auto v = get<long long>(node, field);
    if (v < 0) fail(node, field, "must be non-negative");
    return static_cast<std::size_t>(v);
  }

  template <typename F>
  auto wrap(const YAML::Node& node, const std::string& field, F&& f) const {
    try {
      return f();
    } catch (const ValidationError& e) {
      fail(node, field, e.what());
    }
  }

 private:
  std::string source_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

YAML::Node load_yaml(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

void read_dgp(const Reader& rd, const YAML::Node& node, DgpParams& p) {
  rd.only_keys(node, "data.dgp",
               {"mean_age", "sd_age", "nu_intercepts", "nu_age", "p_therapy", "beta_stage",
                "beta_therapy", "baseline_bp", "sd_bp"});
  const std::string f = "data.dgp.";
  rd.maybe(node, "mean_age", f, p.mean_age);
  rd.maybe(node, "sd_age", f, p.sd_age);
  rd.maybe(node, "nu_age", f, p.nu_age);
  rd.maybe(node, "p_therapy", f, p.p_therapy);
  rd.maybe(node, "beta_therapy", f, p.beta_therapy);
  rd.maybe(node, "baseline_bp", f, p.baseline_bp);
  rd.maybe(node, "sd_bp", f, p.sd_bp);
  auto array = [&](const char* key, auto& out) {
    const auto seq = node[key];
    if (!seq) return;
    if (!seq.IsSequence() || seq.size() != out.size())
      rd.fail(seq, f + key, "expected a list of " + std::to_string(out.size()) + " numbers");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rd.get<double>(seq[i], f + key);
  };
  array("nu_intercepts", p.nu_intercepts);
  array("beta_stage", p.beta_stage);
  rd.wrap(node, "data.dgp", [&] {
    p.validate();
    return 0;
  });
}

}  // namespace

StudyConfig parse_study_config(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& source) {
  const Reader rd(source);
  const YAML::Node root = load_yaml(text, source);
  if (!root.IsMap()) throw ValidationError(source + ": expected a mapping at top level");
  rd.only_keys(root, "config", {"study", "debias", "data", "generators", "estimands", "truth"});

  StudyConfig cfg;
  if (const auto s = root["study"]) {
    rd.only_keys(s, "study",
                 {"seed", "n_grid", "runs", "m", "nuisance_folds", "methods", "level", "threads"});
    rd.maybe(s, "seed", "study.", cfg.seed);
    if (const auto g = s["n_grid"]) {
      if (!g.IsSequence() || g.size() == 0) rd.fail(g, "study.n_grid", "expected a non-empty list");
      cfg.n_grid.clear();
      for (const auto& v : g) cfg.n_grid.push_back(rd.count(v, "study.n_grid"));
      for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
          rd.fail(g[i], "study.n_grid", "must be strictly increasing");
    }
    if (const auto r = s["runs"]) {
      cfg.runs = rd.count(r, "study.runs");
      if (cfg.runs < 2) rd.fail(r, "study.runs", "must be >= 2");
    }
    if (const auto m = s["m"]) {
      const auto text_m = rd.get<std::string>(m, "study.m");
      if (text_m == "equal_to_n") {
        cfg.m_rule = {};
      } else {
        cfg.m_rule = {MRule::Kind::kFixed, rd.count(m, "study.m")};
        if (cfg.m_rule.fixed < 2) rd.fail(m, "study.m", "must be >= 2");
      }
    }
    if (const auto k = s["nuisance_folds"]) {
      cfg.nuisance_folds = rd.count(k, "study.nuisance_folds");
      if (cfg.nuisance_folds < 1) rd.fail(k, "study.nuisance_folds", "must be >= 1");
    }
    if (const auto ms = s["methods"]) {
      if (!ms.IsSequence() || ms.size() == 0)
        rd.fail(ms, "study.methods", "expected a non-empty list");
      cfg.methods.clear();
      for (const auto& v : ms) {
        const auto name = rd.get<std::string>(v, "study.methods");
        if (name == "mle") cfg.methods.push_back(Method::kMle);
        else if (name == "eic") cfg.methods.push_back(Method::kEic);
        else rd.fail(v, "study.methods", "unknown method '" + name + "' (mle, eic)");
      }
    }
    rd.maybe(s, "level", "study.", cfg.level);
    if (const auto t = s["threads"]) cfg.threads = rd.count(t, "study.threads");
  }

  if (const auto d = root["debias"]) {
    rd.only_keys(d, "debias", {"k_large", "k_cond", "strict", "verify", "split_folds"});
    if (const auto v = d["k_large"]) cfg.debias.k_large = rd.count(v, "debias.k_large");
    if (const auto v = d["k_cond"]) cfg.debias.k_cond = rd.count(v, "debias.k_cond");
    rd.maybe(d, "strict", "debias.", cfg.debias.strict);
    rd.maybe(d, "verify", "debias.", cfg.debias.verify);
    if (const auto v = d["split_folds"]) cfg.debias.split_folds = rd.count(v, "debias.split_folds");
    if (cfg.debias.k_large < 2) rd.fail(d, "debias.k_large", "must be >= 2");
    if (cfg.debias.k_cond < 2) rd.fail(d, "debias.k_cond", "must be >= 2");
  }

  if (const auto data = root["data"]) {
    rd.only_keys(data, "data", {"dgp", "population", "schema"});
    if (data["dgp"] && data["population"])
      rd.fail(data, "data", "give either dgp or population, not both");
    if (const auto dgp = data["dgp"]) read_dgp(rd, dgp, cfg.dgp);
    if (const auto pop = data["population"]) {
      const auto schema_node = data["schema"];
      if (!schema_node) rd.fail(data, "data.schema", "required with a population");
      const auto pop_path = base_dir / rd.get<std::string>(pop, "data.population");
      const auto schema_path = base_dir / rd.get<std::string>(schema_node, "data.schema");
      const Schema schema = load_schema(schema_path);
      cfg.population = std::make_shared<const Table>(read_csv(pop_path, schema));
    }
  }

  if (const auto g = root["generators"]) {
    if (!g.IsSequence()) rd.fail(g, "generators", "expected a list");
    for (const auto& v : g) {
      const auto text_g = rd.get<std::string>(v, "generators");
      cfg.generators.push_back(rd.wrap(v, "generators", [&] {
        auto spec = GeneratorSpec::parse(text_g);
        spec.validate();
        return spec;
      }));
    }
  }

  const Schema schema = cfg.population ? cfg.population->schema() : dgp_schema();
  const auto e = root["estimands"];
  if (!e || !e.IsSequence() || e.size() == 0)
    rd.fail(e ? e : root, "estimands", "expected a non-empty list");
  for (const auto& v : e) {
    EstimandConfig ec;
    YAML::Node spec_node = v;
    if (v.IsMap()) {
      rd.only_keys(v, "estimands[]", {"spec", "debias"});
      // Node assignment writes through; reset rebinds.
      spec_node.reset(v["spec"]);
      if (!spec_node) rd.fail(v, "estimands[].spec", "missing");
      rd.maybe(v, "debias", "estimands[].", ec.debias);
    }
    const auto text_e = rd.get<std::string>(spec_node, "estimands[].spec");
    ec.spec = rd.wrap(spec_node, "estimands[].spec", [&] {
      auto spec = EstimandSpec::parse(text_e);
      spec.validate(schema);
      return spec;
    });
    cfg.estimands.push_back(std::move(ec));
  }

  if (const auto t = root["truth"]) {
    if (!t.IsMap()) rd.fail(t, "truth", "expected a mapping");
    for (const auto& kv : t) {
      const auto key = kv.first.as<std::string>();
      const auto canonical = rd.wrap(kv.first, "truth", [&] { return EstimandSpec::parse(key); });
      cfg.truth[canonical.to_string()] = rd.get<double>(kv.second, "truth." + key);
    }
  }

  rd.wrap(root, "config", [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  return parse_study_config(read_file(path), path.parent_path(), path.string());
}

Schema parse_schema(const std::string& text, const std::string& source) {
  const Reader rd(source);
  const YAML::Node root = load_yaml(text, source);
  if (!root.IsMap()) throw ValidationError(source + ": expected a mapping with 'columns'");
  rd.only_keys(root, "schema", {"columns"});
  const auto cols = root["columns"];
  if (!cols || !cols.IsSequence() || cols.size() == 0)
    rd.fail(cols ? cols : root, "columns", "expected a non-empty list");
  std::vector<ColumnSpec> specs;
  for (const auto& c : cols) {
    rd.only_keys(c, "columns[]", {"name", "kind", "levels"});
    if (!c["name"] || !c["kind"]) rd.fail(c, "columns[]", "name and kind are required");
    const auto name = rd.get<std::string>(c["name"], "columns[].name");
    const auto kind = rd.get<std::string>(c["kind"], "columns[].kind");
    std::vector<std::string> levels;
    if (const auto l = c["levels"]) {
      if (!l.IsSequence()) rd.fail(l, "columns[].levels", "expected a list");
      for (const auto& v : l) levels.push_back(rd.get<std::string>(v, "columns[].levels"));
    }
    const bool needs_levels = kind == "ordinal" || kind == "categorical";
    if (!needs_levels && c["levels"]) rd.fail(c["levels"], "columns[].levels", "only for ordinal and categorical columns");
    specs.push_back(rd.wrap(c, "columns[" + name + "]", [&] {
      if (kind == "continuous") return ColumnSpec{name, ColumnKind::continuous()};
      if (kind == "binary") return ColumnSpec{name, ColumnKind::binary()};
      if (kind == "ordinal") return ColumnSpec{name, ColumnKind::ordinal(levels)};
      if (kind == "categorical") return ColumnSpec{name, ColumnKind::categorical(levels)};
      throw ValidationError("unknown kind '" + kind + "'");
    }));
  }
  return rd.wrap(root, "columns", [&] { return Schema(std::move(specs)); });
}

Schema load_schema(const std::filesystem::path& path) {
  return parse_schema(read_file(path), path.string());
}

std::string schema_to_yaml(const Schema& schema) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "columns" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : schema.columns()) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "kind" << YAML::Value << kind_name(c.kind.kind());
    if (c.kind.kind() == Kind::kOrdinal || c.kind.kind() == Kind::kCategorical)
      out << YAML::Key << "levels" << YAML::Value << YAML::Flow << c.kind.levels();
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace synthdebias
