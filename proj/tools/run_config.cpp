#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace sasaki::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(prefix + it.key(), "unknown key");
    }
  }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out, const std::string& prefix) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(prefix + key, "wrong type");
  }
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

RunConfig parse_config_json(const json& doc, bool check) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown_keys(doc,
                      {"command", "nt", "grid", "eps_start", "eps_min", "eps_factor",
                       "newton_tol", "max_newton", "m_init", "linear_solver", "boundary",
                       "rhs", "out_dir", "level", "identity_bound", "threads"},
                      "");
  RunConfig cfg;
  read_into(doc, "command", cfg.command, "");
  read_into(doc, "nt", cfg.nt, "");
  read_into(doc, "grid", cfg.grid, "");
  read_into(doc, "eps_start", cfg.solver.eps_start, "");
  read_into(doc, "eps_min", cfg.solver.eps_min, "");
  read_into(doc, "eps_factor", cfg.solver.eps_factor, "");
  read_into(doc, "newton_tol", cfg.solver.newton_tol, "");
  read_into(doc, "max_newton", cfg.solver.max_newton, "");
  read_into(doc, "m_init", cfg.solver.m_init, "");
  if (doc.contains("linear_solver")) {
    const std::string name = doc.at("linear_solver").get<std::string>();
    if (name == "bicgstab") {
      cfg.solver.linear_solver = LinearSolver::bicgstab_ilut;
    } else if (name == "sparselu") {
      cfg.solver.linear_solver = LinearSolver::sparse_lu;
    } else {
      throw ConfigError("linear_solver", "expected \"bicgstab\" or \"sparselu\"");
    }
  }
  read_into(doc, "out_dir", cfg.out_dir, "");
  read_into(doc, "level", cfg.level, "");
  read_into(doc, "identity_bound", cfg.identity_bound, "");
  read_into(doc, "threads", cfg.threads, "");

  if (doc.contains("boundary")) {
    const json& b = doc.at("boundary");
    if (!b.is_object()) throw ConfigError("boundary", "must be an object");
    reject_unknown_keys(b,
                        {"kind", "phi0", "phi1", "amplitude", "frequency", "seed", "max_mode"},
                        "boundary.");
    read_into(b, "kind", cfg.boundary.kind, "boundary.");
    if (cfg.boundary.kind == "file") {
      // file paths reuse the phi0/phi1 slots as strings
      reject_unknown_keys(b, {"kind", "phi0", "phi1"}, "boundary.");
      read_into(b, "phi0", cfg.boundary.phi0_file, "boundary.");
      read_into(b, "phi1", cfg.boundary.phi1_file, "boundary.");
    } else {
      read_into(b, "phi0", cfg.boundary.phi0, "boundary.");
      read_into(b, "phi1", cfg.boundary.phi1, "boundary.");
      read_into(b, "amplitude", cfg.boundary.amplitude, "boundary.");
      read_into(b, "frequency", cfg.boundary.frequency, "boundary.");
      read_into(b, "seed", cfg.boundary.seed, "boundary.");
      read_into(b, "max_mode", cfg.boundary.max_mode, "boundary.");
    }
  }
  if (doc.contains("rhs")) {
    const json& r = doc.at("rhs");
    if (!r.is_object()) throw ConfigError("rhs", "must be an object");
    reject_unknown_keys(r, {"kind", "value", "amplitude", "frequency"}, "rhs.");
    read_into(r, "kind", cfg.rhs.kind, "rhs.");
    read_into(r, "value", cfg.rhs.value, "rhs.");
    read_into(r, "amplitude", cfg.rhs.amplitude, "rhs.");
    read_into(r, "frequency", cfg.rhs.frequency, "rhs.");
  }

  if (check) validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path, bool check) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("config parse error: ") + e.what());
  }
  return parse_config_json(doc, check);
}

void validate(const RunConfig& cfg) {
  static const std::set<std::string> commands = {"solve", "distance", "verify",
                                                 "identity-check"};
  if (!commands.count(cfg.command)) {
    throw ConfigError("command",
                      "expected one of solve, distance, verify, identity-check");
  }
  if (cfg.nt < 2) throw ConfigError("nt", "must be >= 2");
  if (cfg.grid.empty() || cfg.grid.size() % 2 != 0) {
    throw ConfigError("grid", "expected 2n per-axis node counts");
  }
  for (int d : cfg.grid) {
    if (d < 3) throw ConfigError("grid", "every axis needs at least 3 nodes");
  }
  if (cfg.transverse_dimension() > 4) throw ConfigError("grid", "supported n is 1..4");
  if (!(cfg.solver.eps_min > 0.0)) throw ConfigError("eps_min", "must be positive");
  if (!(cfg.solver.eps_start >= cfg.solver.eps_min)) {
    throw ConfigError("eps_start", "must be >= eps_min");
  }
  if (!(cfg.solver.eps_factor > 0.0 && cfg.solver.eps_factor < 1.0)) {
    throw ConfigError("eps_factor", "must lie in (0, 1)");
  }
  if (!(cfg.solver.newton_tol > 0.0)) throw ConfigError("newton_tol", "must be positive");
  if (cfg.solver.max_newton < 1) throw ConfigError("max_newton", "must be >= 1");
  if (!(cfg.solver.m_init > 0.0)) throw ConfigError("m_init", "must be positive");
  if (cfg.threads < 0) throw ConfigError("threads", "must be >= 0");

  const BoundarySpec& b = cfg.boundary;
  if (b.kind == "constants") {
    // any constants are admissible
  } else if (b.kind == "cosine") {
    if (b.frequency < 1) throw ConfigError("boundary.frequency", "must be >= 1");
    const double factor = b.amplitude * kPi * kPi * b.frequency * b.frequency;
    if (!(factor < 1.0)) {
      throw ConfigError("boundary.amplitude",
                        "amplitude * (pi * frequency)^2 must stay below 1 "
                        "(inadmissible metric)");
    }
  } else if (b.kind == "random-bandlimited") {
    if (b.max_mode < 1) throw ConfigError("boundary.max_mode", "must be >= 1");
    if (!(b.amplitude > 0.0)) throw ConfigError("boundary.amplitude", "must be positive");
  } else if (b.kind == "file") {
    if (b.phi0_file.empty() || b.phi1_file.empty()) {
      throw ConfigError("boundary.phi0", "file boundary needs phi0 and phi1 paths");
    }
  } else {
    throw ConfigError("boundary.kind",
                      "expected constants, cosine, random-bandlimited, or file");
  }

  if (cfg.rhs.kind == "constant") {
    if (!(cfg.rhs.value > 0.0)) throw ConfigError("rhs.value", "must be positive");
  } else if (cfg.rhs.kind == "cosine") {
    if (!(cfg.rhs.value - std::abs(cfg.rhs.amplitude) > 0.0)) {
      throw ConfigError("rhs.amplitude", "rhs must stay positive everywhere");
    }
    if (cfg.rhs.frequency < 1) throw ConfigError("rhs.frequency", "must be >= 1");
  } else {
    throw ConfigError("rhs.kind", "expected constant or cosine");
  }

  if (cfg.command == "verify" && cfg.level != "quick" && cfg.level != "full") {
    throw ConfigError("level", "expected quick or full");
  }
  if (cfg.identity_bound < 0.0) throw ConfigError("identity_bound", "must be >= 0");
}

}  // namespace sasaki::cli
