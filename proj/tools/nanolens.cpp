// nanolens: command-line front end for the lens field solver.
//
// Exit codes: 0 success, 1 a validation check failed, 2 usage or
// precondition error, 3 analysis error (a JSON error object is printed).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nanolens/analysis.hpp"
#include "nanolens/contours.hpp"
#include "nanolens/io.hpp"
#include "nanolens/resonance.hpp"
#include "nanolens/validation.hpp"

namespace {

using namespace nanolens;

struct UsageError : PreconditionError {
  using PreconditionError::PreconditionError;
};

Vec3 parse_point(const std::string& text) {
  std::istringstream in(text);
  std::string part;
  double v[3];
  int n = 0;
  while (std::getline(in, part, ',')) {
    if (n == 3) throw UsageError("--at: expected x_nm,y_nm,z_nm, got '" + text + "'");
    std::size_t used = 0;
    try {
      v[n] = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !std::isfinite(v[n]))
      throw UsageError("--at: expected x_nm,y_nm,z_nm, got '" + text + "'");
    ++n;
  }
  if (n != 3) throw UsageError("--at: expected x_nm,y_nm,z_nm, got '" + text + "'");
  return Vec3{v[0], v[1], v[2]} * units::nm;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("--out: cannot open " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

FocusReport require_minimum(const RunConfig& cfg) {
  const FocusReport focus = find_focus(cfg.lens(), cfg.bias(), cfg.focus_options(), cfg.quadrature);
  if (focus.classification != Classification::minimum)
    throw AnalysisError(std::string("no |B| minimum on the axis at this bias (classification ") +
                        to_string(focus.classification) + ")");
  return focus;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field, focus and contour analysis for a planar permanent-magnet lens"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  std::optional<double> bias_override;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_path, "write the report or CSV here instead of stdout");
  app.add_option("--bias", bias_override, "override bias_gauss");

  auto* field = app.add_subcommand("field", "B and |B| at one point");
  std::string at;
  field->add_option("--at", at, "x_nm,y_nm,z_nm")->required();

  auto* focus = app.add_subcommand("focus", "locate and classify the |B| stationary point");
  auto* sweep = app.add_subcommand("sweep", "classify the focus over a bias range");
  std::optional<double> sweep_from, sweep_to, sweep_step;
  sweep->add_option("--from", sweep_from, "first bias, Gauss");
  sweep->add_option("--to", sweep_to, "last bias, Gauss");
  sweep->add_option("--step", sweep_step, "bias step, Gauss");

  auto* tensor = app.add_subcommand("tensor", "gradient tensor at the focus");
  auto* contours = app.add_subcommand("contours", "|B| iso-lines in a vertical plane through the focus");
  std::string plane_name = "p45";
  contours->add_option("--plane", plane_name, "p45 or m45")->check(CLI::IsMember({"p45", "m45"}));
  auto* vectors = app.add_subcommand("vectors", "in-plane field vectors around the focus");
  std::string vector_plane = "p45";
  vectors->add_option("--plane", vector_plane, "p45, m45 or xy")->check(CLI::IsMember({"p45", "m45", "xy"}));
  auto* selectivity = app.add_subcommand("selectivity", "resonance frequency and resonant-shell extents");
  auto* validate_cmd = app.add_subcommand("validate", "oracle and Maxwell-constraint checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (bias_override) cfg.bias_gauss = *bias_override;
    if (out_path.empty()) out_path = cfg.output.report_path;
    if ((*contours || *vectors) && !cfg.output.csv_path.empty() && out_path == cfg.output.report_path)
      out_path = cfg.output.csv_path;

    const LensGeometry lens = cfg.lens();
    cfg.quadrature.validate();

    if (*field) {
      const Vec3 r = parse_point(at);
      const FieldSample s = field_at(lens, cfg.bias(), r, cfg.quadrature);
      Output out(out_path);
      out.stream() << dump(field_json(s));
      return 0;
    }
    if (*focus) {
      const FocusReport r = find_focus(lens, cfg.bias(), cfg.focus_options(), cfg.quadrature);
      Output out(out_path);
      out.stream() << dump(focus_json(r));
      return 0;
    }
    if (*sweep) {
      const double from = sweep_from.value_or(cfg.analysis.sweep.from_gauss);
      const double to = sweep_to.value_or(cfg.analysis.sweep.to_gauss);
      const double step = sweep_step.value_or(cfg.analysis.sweep.step_gauss);
      if (!(step > 0.0)) throw UsageError("--step: must be > 0");
      if (to < from) throw UsageError("--to: must not be below --from");
      const SweepResult s = bias_sweep(lens, from * units::gauss, to * units::gauss, step * units::gauss,
                                       cfg.focus_options(), cfg.quadrature);
      Output out(out_path);
      out.stream() << dump(sweep_json(s));
      return 0;
    }
    if (*tensor) {
      const FocusReport f = require_minimum(cfg);
      const TensorReport t = focus_tensor(lens, cfg.bias(), f.position, cfg.quadrature);
      Output out(out_path);
      out.stream() << dump(tensor_json(t, f.position));
      return 0;
    }
    if (*contours) {
      const FocusReport f = require_minimum(cfg);
      const auto axes = lens.symmetry_axes();
      const double angle = plane_name == "p45" ? axes[0] : axes[1];
      const PlaneSpec plane = PlaneSpec::vertical(angle, f.position);
      const auto& cc = cfg.analysis.contours;
      const FieldGrid grid = field_grid(lens, cfg.bias(), plane, GridWindow::centered(cc.window_nm * units::nm),
                                        cc.grid_n, cc.grid_n, cfg.quadrature);
      const ScalarGrid mag = magnitude_grid(grid);
      const auto [lo, hi] = std::minmax_element(mag.values.begin(), mag.values.end());
      const auto levels = default_levels(cc.center_gauss * units::gauss, cc.spacing_gauss * units::gauss, *lo, *hi);
      Output out(out_path);
      write_contours_csv(out.stream(), extract_contours(mag, levels, plane));
      return 0;
    }
    if (*vectors) {
      const FocusReport f = require_minimum(cfg);
      const auto axes = lens.symmetry_axes();
      const PlaneSpec plane = vector_plane == "xy"    ? PlaneSpec::horizontal(axes[0], f.position)
                              : vector_plane == "p45" ? PlaneSpec::vertical(axes[0], f.position)
                                                      : PlaneSpec::vertical(axes[1], f.position);
      const auto& vc = cfg.analysis.vectors;
      const FieldGrid grid = vector_grid(lens, cfg.bias(), plane, vc.window_nm * units::nm, vc.grid_n, cfg.quadrature);
      Output out(out_path);
      write_vectors_csv(out.stream(), grid);
      return 0;
    }
    if (*selectivity) {
      SelectivityOptions opt;
      opt.scan = cfg.shell_options();
      const SelectivityReport s =
          selectivity_report(lens, cfg.bias(), cfg.spin_species(), cfg.analysis.linewidth_gauss * units::gauss,
                             cfg.focus_options(), cfg.quadrature, opt);
      Output out(out_path);
      out.stream() << dump(selectivity_json(s));
      return 0;
    }
    if (*validate_cmd) {
      const auto checks = run_validation(lens, cfg.quadrature);
      Json list = Json::array();
      bool all = true;
      for (const auto& c : checks) {
        list.push_back({{"name", c.name}, {"value", round9(c.value)}, {"tolerance", c.tolerance}, {"passed", c.passed}});
        all = all && c.passed;
      }
      Output out(out_path);
      out.stream() << dump(Json{{"checks", list}, {"all_passed", all}});
      return all ? 0 : 1;
    }
  } catch (const AnalysisError& e) {
    std::cout << dump(error_json("analysis", e.what()));
    return 3;
  } catch (const ConvergenceError& e) {
    std::cout << dump(error_json("convergence", e.what()));
    return 3;
  } catch (const Error& e) {
    std::cerr << "nanolens: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
