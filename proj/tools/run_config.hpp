#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sasaki/solver.hpp"

namespace sasaki::cli {

/// Configuration/validation failure; `field` is the JSON path of the
/// offending entry ("" for document-level problems). Maps to exit code 64.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_, const std::string& message)
      : std::runtime_error(field_.empty() ? message : field_ + ": " + message),
        field(std::move(field_)) {}
};

struct BoundarySpec {
  std::string kind = "constants";  // constants | cosine | random-bandlimited | file
  double phi0 = 0.0;
  double phi1 = 1.0;
  double amplitude = 0.05;
  int frequency = 1;
  std::uint64_t seed = 1;
  int max_mode = 2;
  std::string phi0_file;
  std::string phi1_file;
};

struct RhsSpec {
  std::string kind = "constant";  // constant | cosine
  double value = 1.0;
  double amplitude = 0.0;
  int frequency = 1;
};

struct RunConfig {
  std::string command;  // solve | distance | verify | identity-check
  int nt = 32;
  std::vector<int> grid = {16, 16};
  SolverConfig solver;
  BoundarySpec boundary;
  RhsSpec rhs;
  std::string out_dir = ".";
  std::string level = "quick";   // verify
  double identity_bound = 0.0;   // identity-check: 0 = report only
  int threads = 0;               // 0 = automatic

  int transverse_dimension() const { return static_cast<int>(grid.size()) / 2; }
};

/// Parse + validate a JSON document. Unknown keys are rejected; all errors
/// carry the field path. `check = false` defers validation, for configs the
/// CLI completes with subcommand and flag overrides.
RunConfig parse_config_json(const nlohmann::json& doc, bool check = true);

/// Parse + validate a JSON config file.
RunConfig parse_config_file(const std::string& path, bool check = true);

/// Validation only (parse_config_* call this; CLI-assembled configs reuse it).
void validate(const RunConfig& cfg);

}  // namespace sasaki::cli
