#pragma once

/**
 * @file io.hpp
 * @brief Run configuration, JSON reports and CSV grids.
 *
 * Every key carries its unit (outer_radius_nm, bias_gauss, ...). The config
 * keeps boundary units so that serialize -> parse is exact; conversion to SI
 * happens in the accessors. Report numbers are rounded to 9 significant
 * digits before serialization.
 */

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanolens/analysis.hpp"
#include "nanolens/contours.hpp"
#include "nanolens/errors.hpp"
#include "nanolens/fieldsolver.hpp"
#include "nanolens/geometry.hpp"
#include "nanolens/quadrature.hpp"
#include "nanolens/resonance.hpp"
#include "nanolens/units.hpp"

namespace nanolens {

using Json = nlohmann::ordered_json;

struct GeometryConfig {
  double outer_radius_nm = 60.0;
  double inner_radius_nm = 40.0;
  double thickness_nm = 10.0;
  double mu0_M_tesla = 2.0;
  std::array<std::array<double, 2>, 2> cut_quadrants_deg{{{0.0, 90.0}, {180.0, 270.0}}};

  bool operator==(const GeometryConfig&) const = default;
};

struct SweepConfig {
  double from_gauss = -900.0;
  double to_gauss = -400.0;
  double step_gauss = 25.0;

  bool operator==(const SweepConfig&) const = default;
};

struct ContourConfig {
  double window_nm = 20.0;
  int grid_n = 201;
  double center_gauss = 100.5;
  double spacing_gauss = 6.0;

  bool operator==(const ContourConfig&) const = default;
};

struct VectorConfig {
  double window_nm = 10.0;
  int grid_n = 21;

  bool operator==(const VectorConfig&) const = default;
};

struct AnalysisConfig {
  double z_search_min_nm = 5.0;
  double z_search_max_nm = 60.0;
  double scan_step_nm = 0.25;
  SweepConfig sweep;
  ContourConfig contours;
  VectorConfig vectors;
  double linewidth_gauss = 1.0;
  double shell_step_nm = 0.01;
  double shell_half_length_nm = 8.0;

  bool operator==(const AnalysisConfig&) const = default;
};

struct SpeciesConfig {
  double gamma_over_2pi_hz_per_tesla = 0.0;
  double moment_joule_per_tesla = 0.0;

  bool operator==(const SpeciesConfig&) const = default;
};

struct OutputConfig {
  std::string report_path;  ///< empty: stdout
  std::string csv_path;     ///< empty: stdout

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  double bias_gauss = -650.0;
  QuadratureSpec quadrature;
  AnalysisConfig analysis;
  std::map<std::string, SpeciesConfig> species{
      {"proton", {42.5775e6, 1.41060679736e-26}},
      {"electron", {28.0249e9, 9.2847647043e-24}}};
  std::string selected_species = "proton";
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;

  LensGeometry lens() const {
    LensGeometry g;
    g.outer_radius = geometry.outer_radius_nm * units::nm;
    g.inner_radius = geometry.inner_radius_nm * units::nm;
    g.thickness = geometry.thickness_nm * units::nm;
    g.mu0_M = geometry.mu0_M_tesla;
    for (int i = 0; i < 2; ++i)
      g.cut_quadrants[i] = {geometry.cut_quadrants_deg[i][0] * units::deg,
                            geometry.cut_quadrants_deg[i][1] * units::deg};
    // Degrees do not convert to an exact pi/2 width; snap within the
    // validator's tolerance window so "0, 90" means a quarter turn.
    for (auto& cut : g.cut_quadrants)
      if (std::abs(cut.width() - 0.5 * std::numbers::pi) < 1e-9) cut.end = cut.start + 0.5 * std::numbers::pi;
    validate(g);
    return g;
  }

  BiasField bias() const { return {bias_gauss * units::gauss}; }

  FocusOptions focus_options() const {
    FocusOptions o;
    o.z_min = analysis.z_search_min_nm * units::nm;
    o.z_max = analysis.z_search_max_nm * units::nm;
    o.scan_step = analysis.scan_step_nm * units::nm;
    return o;
  }

  ShellScanOptions shell_options() const {
    return {analysis.shell_step_nm * units::nm, analysis.shell_half_length_nm * units::nm};
  }

  SpinSpecies spin_species() const {
    const auto it = species.find(selected_species);
    if (it == species.end()) throw PreconditionError("config: unknown species " + selected_species);
    SpinSpecies s{it->first, it->second.gamma_over_2pi_hz_per_tesla, it->second.moment_joule_per_tesla};
    s.validate();
    return s;
  }
};

// ---------------------------------------------------------------------------
// Config (de)serialization

inline Json to_json(const RunConfig& c) {
  Json j;
  j["geometry"] = {{"outer_radius_nm", c.geometry.outer_radius_nm},
                   {"inner_radius_nm", c.geometry.inner_radius_nm},
                   {"thickness_nm", c.geometry.thickness_nm},
                   {"mu0_M_tesla", c.geometry.mu0_M_tesla},
                   {"cut_quadrants_deg", c.geometry.cut_quadrants_deg}};
  j["bias_gauss"] = c.bias_gauss;
  j["quadrature"] = {{"radial_order", c.quadrature.radial_order},
                     {"angular_order", c.quadrature.angular_order},
                     {"refinement_limit", c.quadrature.refinement_limit},
                     {"rel_tolerance", c.quadrature.rel_tolerance}};
  const auto& a = c.analysis;
  j["analysis"] = {
      {"z_search_nm", {a.z_search_min_nm, a.z_search_max_nm}},
      {"scan_step_nm", a.scan_step_nm},
      {"sweep", {{"from_gauss", a.sweep.from_gauss}, {"to_gauss", a.sweep.to_gauss}, {"step_gauss", a.sweep.step_gauss}}},
      {"contours",
       {{"window_nm", a.contours.window_nm},
        {"grid_n", a.contours.grid_n},
        {"center_gauss", a.contours.center_gauss},
        {"spacing_gauss", a.contours.spacing_gauss}}},
      {"vectors", {{"window_nm", a.vectors.window_nm}, {"grid_n", a.vectors.grid_n}}},
      {"linewidth_gauss", a.linewidth_gauss},
      {"shell_step_nm", a.shell_step_nm},
      {"shell_half_length_nm", a.shell_half_length_nm}};
  Json species = Json::object();
  for (const auto& [name, s] : c.species)
    species[name] = {{"gamma_over_2pi_hz_per_tesla", s.gamma_over_2pi_hz_per_tesla},
                     {"moment_joule_per_tesla", s.moment_joule_per_tesla}};
  j["species"] = species;
  j["selected_species"] = c.selected_species;
  j["output"] = {{"report_path", c.output.report_path}, {"csv_path", c.output.csv_path}};
  return j;
}

namespace detail {

// Missing keys keep their defaults; present keys must have the right type.
template <class T>
void read_key(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError("config: bad value for " + where + key + ": " + e.what());
  }
}

inline const Json& block(const Json& j, const char* key, const Json& empty) {
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw PreconditionError(std::string("config: ") + key + " must be an object");
  return j.at(key);
}

}  // namespace detail

inline RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw PreconditionError("config: top level must be an object");
  static const Json empty = Json::object();
  RunConfig c;
  const Json& g = detail::block(j, "geometry", empty);
  detail::read_key(g, "outer_radius_nm", c.geometry.outer_radius_nm, "geometry.");
  detail::read_key(g, "inner_radius_nm", c.geometry.inner_radius_nm, "geometry.");
  detail::read_key(g, "thickness_nm", c.geometry.thickness_nm, "geometry.");
  detail::read_key(g, "mu0_M_tesla", c.geometry.mu0_M_tesla, "geometry.");
  detail::read_key(g, "cut_quadrants_deg", c.geometry.cut_quadrants_deg, "geometry.");
  detail::read_key(j, "bias_gauss", c.bias_gauss, "");

  const Json& q = detail::block(j, "quadrature", empty);
  detail::read_key(q, "radial_order", c.quadrature.radial_order, "quadrature.");
  detail::read_key(q, "angular_order", c.quadrature.angular_order, "quadrature.");
  detail::read_key(q, "refinement_limit", c.quadrature.refinement_limit, "quadrature.");
  detail::read_key(q, "rel_tolerance", c.quadrature.rel_tolerance, "quadrature.");

  const Json& a = detail::block(j, "analysis", empty);
  std::array<double, 2> z{c.analysis.z_search_min_nm, c.analysis.z_search_max_nm};
  detail::read_key(a, "z_search_nm", z, "analysis.");
  c.analysis.z_search_min_nm = z[0];
  c.analysis.z_search_max_nm = z[1];
  detail::read_key(a, "scan_step_nm", c.analysis.scan_step_nm, "analysis.");
  const Json& sw = detail::block(a, "sweep", empty);
  detail::read_key(sw, "from_gauss", c.analysis.sweep.from_gauss, "analysis.sweep.");
  detail::read_key(sw, "to_gauss", c.analysis.sweep.to_gauss, "analysis.sweep.");
  detail::read_key(sw, "step_gauss", c.analysis.sweep.step_gauss, "analysis.sweep.");
  const Json& ct = detail::block(a, "contours", empty);
  detail::read_key(ct, "window_nm", c.analysis.contours.window_nm, "analysis.contours.");
  detail::read_key(ct, "grid_n", c.analysis.contours.grid_n, "analysis.contours.");
  detail::read_key(ct, "center_gauss", c.analysis.contours.center_gauss, "analysis.contours.");
  detail::read_key(ct, "spacing_gauss", c.analysis.contours.spacing_gauss, "analysis.contours.");
  const Json& vc = detail::block(a, "vectors", empty);
  detail::read_key(vc, "window_nm", c.analysis.vectors.window_nm, "analysis.vectors.");
  detail::read_key(vc, "grid_n", c.analysis.vectors.grid_n, "analysis.vectors.");
  detail::read_key(a, "linewidth_gauss", c.analysis.linewidth_gauss, "analysis.");
  detail::read_key(a, "shell_step_nm", c.analysis.shell_step_nm, "analysis.");
  detail::read_key(a, "shell_half_length_nm", c.analysis.shell_half_length_nm, "analysis.");

  if (j.contains("species")) {
    const Json& sp = j.at("species");
    if (!sp.is_object()) throw PreconditionError("config: species must be an object");
    c.species.clear();
    for (const auto& [name, entry] : sp.items()) {
      SpeciesConfig s;
      detail::read_key(entry, "gamma_over_2pi_hz_per_tesla", s.gamma_over_2pi_hz_per_tesla, "species." + name + ".");
      detail::read_key(entry, "moment_joule_per_tesla", s.moment_joule_per_tesla, "species." + name + ".");
      c.species[name] = s;
    }
  }
  detail::read_key(j, "selected_species", c.selected_species, "");
  const Json& o = detail::block(j, "output", empty);
  detail::read_key(o, "report_path", c.output.report_path, "output.");
  detail::read_key(o, "csv_path", c.output.csv_path, "output.");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("config: cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw PreconditionError("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Reports

/// Rounds to 9 significant digits so the dumped text is fixed by the value.
inline double round9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline Json vec_json(const Vec3& v, double unit) {
  return Json::array({round9(v.x() / unit), round9(v.y() / unit), round9(v.z() / unit)});
}

inline Json mat_json(const Mat3& m, double unit) {
  Json rows = Json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(vec_json(m.row(i).transpose(), unit));
  return rows;
}

/// Pretty-printed JSON text with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json field_json(const FieldSample& s) {
  return {{"position_nm", vec_json(s.position, units::nm)},
          {"b_gauss", vec_json(s.b, units::gauss)},
          {"bmag_gauss", round9(s.magnitude / units::gauss)}};
}

inline Json focus_json(const FocusReport& r) {
  Json hess_ev = Json::array();
  for (int i = 0; i < 3; ++i) hess_ev.push_back(round9(r.hessian_eigenvalues[i] / (units::gauss / (units::nm * units::nm))));
  return {{"bias_gauss", round9(r.bias_used / units::gauss)},
          {"x_nm", round9(r.position.x() / units::nm)},
          {"y_nm", round9(r.position.y() / units::nm)},
          {"z_nm", round9(r.position.z() / units::nm)},
          {"bmin_gauss", round9(r.b_min / units::gauss)},
          {"classification", to_string(r.classification)},
          {"degenerate", r.degenerate},
          {"gradient_norm_gauss_per_nm", round9(r.gradient_norm / units::gauss_per_nm)},
          {"hessian_eigenvalues_gauss_per_nm2", hess_ev},
          {"newton_iterations", r.newton_iterations}};
}

inline Json sweep_json(const SweepResult& s) {
  Json points = Json::array();
  for (const auto& p : s.points)
    points.push_back({{"bias_gauss", round9(p.bias / units::gauss)},
                      {"classification", to_string(p.report.classification)},
                      {"z_nm", round9(p.report.position.z() / units::nm)},
                      {"bmin_gauss", round9(p.report.b_min / units::gauss)}});
  Json transitions = Json::array();
  for (const auto& t : s.transitions)
    transitions.push_back({{"last_bias_gauss", round9(t.last_bias / units::gauss)},
                           {"next_bias_gauss", round9(t.next_bias / units::gauss)},
                           {"from", to_string(t.from)},
                           {"to", to_string(t.to)}});
  Json j{{"points", points}, {"transitions", transitions}};
  if (const auto w = s.minimum_window())
    j["minimum_window_gauss"] = {round9(w->first / units::gauss), round9(w->second / units::gauss)};
  else j["minimum_window_gauss"] = nullptr;
  return j;
}

inline Json tensor_json(const TensorReport& t, const Vec3& position) {
  Json ev = Json::array();
  for (double v : t.eigenvalues) ev.push_back(round9(v / units::gauss_per_angstrom));
  return {{"position_nm", vec_json(position, units::nm)},
          {"lab_gauss_per_angstrom", mat_json(t.lab.entries, units::gauss_per_angstrom)},
          {"rotated_gauss_per_angstrom", mat_json(t.rotated.entries, units::gauss_per_angstrom)},
          {"rotation_deg", round9(t.rotation_angle / units::deg)},
          {"eigenvalues_gauss_per_angstrom", ev},
          {"eigenvectors_columns", mat_json(t.eigenvectors, 1.0)},
          {"null_axis_angle_deg", round9(t.null_axis_angle / units::deg)},
          {"diagonal_frame", t.diagonal_frame},
          {"trace_gauss_per_angstrom", round9(t.lab.trace() / units::gauss_per_angstrom)},
          {"asymmetry_gauss_per_angstrom", round9(t.lab.asymmetry() / units::gauss_per_angstrom)}};
}

inline Json selectivity_json(const SelectivityReport& s) {
  Json axes = Json::array();
  for (int k = 0; k < 3; ++k)
    axes.push_back({{"direction", vec_json(s.shell.axes[k], 1.0)},
                    {"extent_nm", round9(s.shell.extents[k] / units::nm)},
                    {"frequency_gradient_hz_per_nm", round9(s.frequency_gradient[k] * units::nm)},
                    {"lattice_sites", s.lattice_sites[k]},
                    {"detuning_at_5nm_linewidths", round9(s.detuning_at_5nm[k])}});
  return {{"species", s.species},
          {"linewidth_gauss", round9(s.linewidth / units::gauss)},
          {"center_level_gauss", round9(s.center_level / units::gauss)},
          {"focus", focus_json(s.focus)},
          {"focus_frequency_khz", round9(s.focus_frequency / units::kHz)},
          {"focus_angular_frequency_rad_per_s", round9(angular_frequency(s.focus_frequency))},
          {"axes", axes}};
}

inline Json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Header `level_gauss,polyline_id,u_nm,v_nm`; one row per vertex. Polyline
/// ids run over the whole set; closed polylines repeat their first vertex.
inline void write_contours_csv(std::ostream& out, const ContourSet& set) {
  out << "level_gauss,polyline_id,u_nm,v_nm\n";
  long id = 0;
  for (std::size_t l = 0; l < set.levels.size(); ++l) {
    const std::string level = format17(set.levels[l] / units::gauss);
    for (const auto& line : set.polylines[l]) {
      for (const auto& p : line.points)
        out << level << ',' << id << ',' << format17(p.x() / units::nm) << ',' << format17(p.y() / units::nm) << '\n';
      ++id;
    }
  }
}

/// Inverse of write_contours_csv. Levels without polylines do not appear in
/// the file and are not recovered; the plane is supplied by the caller.
inline ContourSet read_contours_csv(std::istream& in, const PlaneSpec& plane = {}) {
  std::string line;
  if (!std::getline(in, line) || line != "level_gauss,polyline_id,u_nm,v_nm")
    throw PreconditionError("contour csv: missing or unexpected header");
  ContourSet set;
  set.plane = plane;
  long current_id = -1;
  double current_level = 0.0;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, c, d;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c, ',') ||
        !std::getline(fields, d))
      throw PreconditionError("contour csv: row " + std::to_string(row) + " needs 4 fields");
    double level_g, u, v;
    long id;
    try {
      level_g = std::stod(a);
      id = std::stol(b);
      u = std::stod(c);
      v = std::stod(d);
    } catch (const std::exception&) {
      throw PreconditionError("contour csv: row " + std::to_string(row) + " is not numeric");
    }
    const double level = level_g * units::gauss;
    if (id != current_id) {
      if (set.levels.empty() || level != current_level) {
        set.levels.push_back(level);
        set.polylines.emplace_back();
      }
      set.polylines.back().emplace_back();
      current_id = id;
      current_level = level;
    } else if (level != current_level) {
      throw PreconditionError("contour csv: polyline " + b + " changes level");
    }
    set.polylines.back().back().points.emplace_back(u * units::nm, v * units::nm);
  }
  for (auto& lines : set.polylines)
    for (auto& pl : lines)
      pl.closed = pl.points.size() > 2 && pl.points.front() == pl.points.back();
  return set;
}

/// Header `u_nm,v_nm,Bu_gauss,Bv_gauss,Bmag_gauss`; rows in grid order.
inline void write_vectors_csv(std::ostream& out, const FieldGrid& grid) {
  out << "u_nm,v_nm,Bu_gauss,Bv_gauss,Bmag_gauss\n";
  for (int iv = 0; iv < grid.n_v; ++iv) {
    for (int iu = 0; iu < grid.n_u; ++iu) {
      const auto& s = grid.at(iu, iv);
      const Vec2 b = in_plane(grid, s);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", grid.u_at(iu) / units::nm,
                    grid.v_at(iv) / units::nm, b.x() / units::gauss, b.y() / units::gauss,
                    s.magnitude / units::gauss);
      out << buf;
    }
  }
}

}  // namespace nanolens
