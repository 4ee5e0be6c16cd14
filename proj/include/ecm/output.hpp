#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecm/config.hpp"
#include "ecm/driver.hpp"

namespace ecm {

inline constexpr const char* version = "1.0.0";
inline constexpr const char* csv_header = "t,V_dis,gap,kerf,ndof,step_wall_s";

namespace output_detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

inline std::ofstream open(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path + "'");
  return os;
}

}  // namespace output_detail

/// CSV text of a series. Every number is printed "%.9e"; missing probes are
/// empty fields; ndof is an integer; lines end in '\n'.
inline std::string format_timeseries(const TimeSeries& ts) {
  using output_detail::sci;
  ts.validate();
  std::string out = csv_header;
  out += '\n';
  for (const auto& r : ts.records) {
    out += sci(r.t) + ',' + sci(r.v_dis) + ',' + (r.gap ? sci(*r.gap) : "") + ',' +
           (r.kerf ? sci(*r.kerf) : "") + ',' + std::to_string(r.ndof) + ',' + sci(r.step_wall_s) +
           '\n';
  }
  return out;
}

inline void write_timeseries(const TimeSeries& ts, const std::string& path) {
  const auto text = format_timeseries(ts);
  auto os = output_detail::open(path);
  os << text;
  if (!os) throw Error("write failed for '" + path + "'");
}

inline TimeSeries parse_timeseries(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header) throw Error("bad time-series header");
  TimeSeries ts;
  std::size_t row = 1;
  auto num = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
      throw Error("bad number '" + s + "' in row " + std::to_string(row));
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++row;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw Error("row " + std::to_string(row) + " has " + std::to_string(f.size()) + " fields");
    TimeRecord r;
    r.t = num(f[0]);
    r.v_dis = num(f[1]);
    if (!f[2].empty()) r.gap = num(f[2]);
    if (!f[3].empty()) r.kerf = num(f[3]);
    r.ndof = static_cast<std::size_t>(std::stoull(f[4]));
    r.step_wall_s = num(f[5]);
    ts.records.push_back(r);
  }
  ts.validate();
  return ts;
}

inline TimeSeries read_timeseries(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_timeseries(ss.str());
}

/// Fields written to a snapshot. Per-element vectors may be empty, in which
/// case zeros are written.
struct SnapshotFields {
  std::span<const double> v;
  std::span<const double> d;
  std::span<const double> lambda;
  std::span<const Vec2> j;
  std::span<const std::uint8_t> metal;
};

/// Legacy VTK ASCII unstructured grid: VTK_QUAD cells, point data v, cell
/// data d, lambda_cat, j_norm and metal.
inline std::string format_snapshot(const Mesh& mesh, const SnapshotFields& f,
                                   const std::string& title = "ecm snapshot") {
  using output_detail::sci;
  const std::size_t nn = mesh.node_count(), ne = mesh.element_count();
  auto check = [](std::size_t have, std::size_t want, const char* what) {
    if (have != 0 && have != want) throw InvalidArgument(std::string("snapshot field size: ") + what);
  };
  check(f.v.size(), nn, "v");
  check(f.d.size(), ne, "d");
  check(f.lambda.size(), ne, "lambda_cat");
  check(f.j.size(), ne, "j");
  check(f.metal.size(), ne, "metal");

  std::string o;
  o.reserve(64 * (nn + 4 * ne));
  o += "# vtk DataFile Version 3.0\n" + title + "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  o += "POINTS " + std::to_string(nn) + " double\n";
  for (const auto& p : mesh.nodes) o += sci(p.x) + ' ' + sci(p.y) + ' ' + sci(0.0) + '\n';
  o += "CELLS " + std::to_string(ne) + ' ' + std::to_string(5 * ne) + '\n';
  for (const auto& q : mesh.elements) {
    o += "4 " + std::to_string(q[0]) + ' ' + std::to_string(q[1]) + ' ' + std::to_string(q[2]) +
         ' ' + std::to_string(q[3]) + '\n';
  }
  o += "CELL_TYPES " + std::to_string(ne) + '\n';
  for (std::size_t e = 0; e < ne; ++e) o += "9\n";
  o += "POINT_DATA " + std::to_string(nn) + "\nSCALARS v double 1\nLOOKUP_TABLE default\n";
  for (std::size_t n = 0; n < nn; ++n) o += sci(f.v.empty() ? 0.0 : f.v[n]) + '\n';
  o += "CELL_DATA " + std::to_string(ne) + '\n';
  auto cell_scalar = [&](const char* name, auto&& value) {
    o += std::string("SCALARS ") + name + " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t e = 0; e < ne; ++e) o += sci(value(e)) + '\n';
  };
  cell_scalar("d", [&](std::size_t e) { return f.d.empty() ? 0.0 : f.d[e]; });
  cell_scalar("lambda_cat", [&](std::size_t e) { return f.lambda.empty() ? 0.0 : f.lambda[e]; });
  cell_scalar("j_norm", [&](std::size_t e) { return f.j.empty() ? 0.0 : norm(f.j[e]); });
  cell_scalar("metal", [&](std::size_t e) { return f.metal.empty() ? 0.0 : double(f.metal[e]); });
  return o;
}

inline void write_snapshot(const Mesh& mesh, const SnapshotFields& f, const std::string& path) {
  const auto text = format_snapshot(mesh, f);
  auto os = output_detail::open(path);
  os << text;
  if (!os) throw Error("write failed for '" + path + "'");
}

inline SnapshotFields snapshot_fields(const Simulation& sim) {
  return {sim.field().v, sim.dissolution().d, sim.cathode_field().lambda, sim.current(),
          sim.dissolution().initially_metal};
}

struct RunManifest {
  std::string config_text;
  PhaseTimes phases;
  std::vector<std::string> files;
};

inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["version"] = version;
  j["config"] = m.config_text;
  j["phases_s"] = {{"geometry", m.phases.geometry},
                   {"assembly", m.phases.assembly},
                   {"solve", m.phases.solve},
                   {"dissolution", m.phases.dissolution},
                   {"total", m.phases.total}};
  j["files"] = m.files;
  return j;
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  auto os = output_detail::open(path);
  os << manifest_json(m).dump(2) << '\n';
}

/// Config text stored in a manifest.
inline ScenarioConfig manifest_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  const auto j = nlohmann::json::parse(in);
  return parse_config_text(j.at("config").get<std::string>());
}

}  // namespace ecm
