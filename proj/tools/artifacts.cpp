#include "artifacts.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "run_config.hpp"

namespace sasaki::cli {

namespace {

std::string dump_header(int nt, const std::vector<int>& grid) {
  std::string dims;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) dims += ',';
    dims += std::to_string(grid[i]);
  }
  return "{\"version\":1,\"nt\":" + std::to_string(nt) + ",\"grid\":[" + dims +
         "],\"dtype\":\"f64\",\"order\":\"t-major-then-row-major\"}\n";
}

void write_le_doubles(std::ofstream& out, const std::vector<double>& values) {
  std::string buf;
  buf.resize(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      buf[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_le_doubles(std::ifstream& in, std::size_t count) {
  std::string buf;
  buf.resize(count * 8);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw std::runtime_error("truncated payload");
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw std::runtime_error("trailing bytes after payload");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
      bits = (bits << 8) |
             static_cast<std::uint64_t>(
                 static_cast<unsigned char>(buf[i * 8 + static_cast<std::size_t>(b)]));
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

struct DumpInfo {
  int nt = 0;
  std::vector<int> grid;
};

DumpInfo read_dump_header(std::ifstream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("malformed dump header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("malformed dump header");
  }
  if (!header.contains("version") || !header.at("version").is_number_integer()) {
    throw std::runtime_error("malformed dump header");
  }
  if (header.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported dump version");
  }
  DumpInfo info;
  try {
    info.nt = header.at("nt").get<int>();
    info.grid = header.at("grid").get<std::vector<int>>();
    if (header.at("dtype").get<std::string>() != "f64" ||
        header.at("order").get<std::string>() != "t-major-then-row-major") {
      throw std::runtime_error("dump header mismatch");
    }
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("malformed dump header");
  }
  if (info.nt < 0 || info.grid.empty()) throw std::runtime_error("dump header mismatch");
  return info;
}

std::int64_t grid_size(const std::vector<int>& grid) {
  std::int64_t total = 1;
  for (int d : grid) total *= d;
  return total;
}

}  // namespace

void write_solution_dump(const PotentialPath& path, const std::vector<int>& grid,
                         const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  const std::string header = dump_header(path.nt, grid);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(path.nt + 1) *
               static_cast<std::size_t>(grid_size(grid)));
  for (const SpatialField& slice : path.slices) {
    flat.insert(flat.end(), slice.v.begin(), slice.v.end());
  }
  write_le_doubles(out, flat);
  if (!out) throw std::runtime_error("write failed: " + file);
}

PotentialPath read_solution_dump(const std::string& file, std::vector<int>* grid_out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + file);
  const DumpInfo info = read_dump_header(in);
  const std::int64_t nodes = grid_size(info.grid);
  const std::vector<double> flat =
      read_le_doubles(in, static_cast<std::size_t>((info.nt + 1) * nodes));
  PotentialPath path;
  path.nt = info.nt;
  path.slices.resize(static_cast<std::size_t>(info.nt) + 1);
  for (int k = 0; k <= info.nt; ++k) {
    SpatialField s(nodes);
    std::memcpy(s.v.data(), flat.data() + static_cast<std::size_t>(k) * nodes,
                static_cast<std::size_t>(nodes) * sizeof(double));
    path.slices[static_cast<std::size_t>(k)] = std::move(s);
  }
  if (grid_out != nullptr) *grid_out = info.grid;
  return path;
}

void write_field_dump(const SpatialField& field, const std::vector<int>& grid,
                      const std::string& file) {
  PotentialPath single;
  single.nt = 0;
  single.slices = {field};
  write_solution_dump(single, grid, file);
}

SpatialField read_field_dump(const std::string& file, const std::vector<int>& expected_grid) {
  std::vector<int> grid;
  PotentialPath path = read_solution_dump(file, &grid);
  if (path.nt != 0) throw std::runtime_error("expected a single-slice field dump: " + file);
  if (grid != expected_grid) {
    throw ConfigError("boundary", "field dump grid does not match the run grid: " + file);
  }
  return std::move(path.slices.front());
}

void write_diagnostics_csv(const PathDiagnostics& d, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << "t,E,I,mu,Q_mean,Q_max,sup_abs_phitt,sup_abs_lap\n";
  char buf[64];
  auto cell = [&](double v, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g%c", v, sep);
    out << buf;
  };
  for (std::size_t k = 0; k < d.t.size(); ++k) {
    cell(d.t[k], ',');
    cell(d.energy[k], ',');
    cell(d.i_functional[k], ',');
    cell(d.k_energy[k], ',');
    cell(d.q_mean[k], ',');
    cell(d.q_max[k], ',');
    cell(d.sup_abs_phitt[k], ',');
    cell(d.sup_abs_lap[k], '\n');
  }
}

nlohmann::ordered_json solve_report_json(const SolveReport& report, int nt,
                                         const std::vector<int>& grid) {
  nlohmann::ordered_json doc;
  doc["converged"] = report.converged;
  doc["nt"] = nt;
  doc["grid"] = grid;
  doc["m_subsolution"] = report.m_subsolution;
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const StageReport& st : report.stages) {
    nlohmann::ordered_json s;
    s["eps"] = st.eps;
    s["iterations"] = st.iterations;
    s["final_residual"] = st.final_residual;
    s["min_schur"] = st.min_schur;
    s["sup_abs_phitt"] = st.sup_abs_phitt;
    s["sup_abs_lap"] = st.sup_abs_lap;
    s["sup_c2w"] = st.sup_c2w;
    stages.push_back(std::move(s));
  }
  doc["stages"] = std::move(stages);
  return doc;
}

nlohmann::ordered_json check_results_json(const std::string& level,
                                          const std::vector<CheckResult>& results) {
  nlohmann::ordered_json doc;
  doc["level"] = level;
  bool all = true;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CheckResult& r : results) {
    nlohmann::ordered_json e;
    e["name"] = r.name;
    e["measured"] = r.measured;
    e["bound"] = r.bound;
    e["pass"] = r.pass;
    e["context"] = r.context;
    arr.push_back(std::move(e));
    all = all && r.pass;
  }
  doc["results"] = std::move(arr);
  doc["all_pass"] = all;
  return doc;
}

void write_json(const nlohmann::ordered_json& doc, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << doc.dump(2) << '\n';
}

}  // namespace sasaki::cli
