#pragma once

#include <filesystem>
#include <string>

#include "synthdebias/harness.hpp"
#include "synthdebias/table.hpp"

namespace synthdebias {

// Study configuration file (YAML):
//
//   study:
//     seed: 20240101
//     n_grid: [50, 160, 500, 1600, 5000]
//     runs: 250
//     m: equal_to_n            # or a row count
//     nuisance_folds: 5
//     methods: [mle, eic]
//     level: 0.95
//     threads: 0
//   debias: {k_large: 1000000, k_cond: 100000, strict: true, verify: false, split_folds: 0}
//   data:
//     dgp: {mean_age: 50, sd_age: 10, ...}   # or
//     population: population.csv              # relative to the config file
//     schema: population.schema.yaml
//   generators: [parametric, "smoothed_bootstrap:bandwidth=3,centres=0.5"]
//   estimands:
//     - mean:age
//     - {spec: "lincoef:bp~therapy|stage", debias: true}
//   truth: {"mean:age": 50}
//
// Errors are ValidationError with "<file>:<line>: <field>: <reason>".
StudyConfig parse_study_config(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& source = "<config>");
StudyConfig load_study_config(const std::filesystem::path& path);

// Schema file (YAML):
//
//   columns:
//     - {name: age, kind: continuous}
//     - {name: stage, kind: ordinal, levels: [I, II, III, IV]}
Schema parse_schema(const std::string& text, const std::string& source = "<schema>");
Schema load_schema(const std::filesystem::path& path);
std::string schema_to_yaml(const Schema& schema);

}  // namespace synthdebias
