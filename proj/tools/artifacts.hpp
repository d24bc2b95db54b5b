#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sasaki/cone.hpp"
#include "sasaki/functionals.hpp"
#include "sasaki/solver.hpp"
#include "sasaki/verify.hpp"

namespace sasaki::cli {

/// Solution dump: one UTF-8 JSON header line
///   {"version":1,"nt":...,"grid":[...],"dtype":"f64","order":"t-major-then-row-major"}
/// terminated by '\n', followed by (nt+1) * prod(grid) raw little-endian
/// 8-byte floats. Round trips are bit-exact. A single spatial field is the
/// nt = 0 special case.
void write_solution_dump(const PotentialPath& path, const std::vector<int>& grid,
                         const std::string& file);
PotentialPath read_solution_dump(const std::string& file, std::vector<int>* grid_out = nullptr);

void write_field_dump(const SpatialField& field, const std::vector<int>& grid,
                      const std::string& file);
SpatialField read_field_dump(const std::string& file, const std::vector<int>& expected_grid);

/// Diagnostics CSV with the fixed column set
///   t,E,I,mu,Q_mean,Q_max,sup_abs_phitt,sup_abs_lap
void write_diagnostics_csv(const PathDiagnostics& d, const std::string& file);

nlohmann::ordered_json solve_report_json(const SolveReport& report, int nt,
                                         const std::vector<int>& grid);
nlohmann::ordered_json check_results_json(const std::string& level,
                                          const std::vector<CheckResult>& results);

void write_json(const nlohmann::ordered_json& doc, const std::string& file);

}  // namespace sasaki::cli
