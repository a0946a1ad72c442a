#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gasreg/errors.hpp"
#include "gasreg/scenario.hpp"
#include "gasreg/simulate.hpp"
#include "gasreg/svg.hpp"
#include "gasreg/timeseries.hpp"

namespace gasreg {

// Headline numbers of one run, all recomputable from the CSV trace.
struct Summary {
  std::string scenario, plant, controller;
  int grid_n = 0;
  double horizon = 0.0, dt = 0.0;
  long steps = 0;
  int log_stride = 1;
  double rho_star_outlet = 0.0;
  // Outlet density deviation |rho(t, l) - rho_star(l)|: global peak and
  // the maximum over the last quarter of the logged window.
  double peak_abs_outlet_dev = 0.0;
  double steady_residual = 0.0;
  // Settling against the band settle_band * rho_star(l): first logged
  // time after which the deviation never leaves the band again.
  double settle_band_abs = 0.0;
  bool settled = false;
  double settle_time = 0.0;
  int saturation_clamps = 0;
};

inline const char* to_string(PlantKind k) {
  return k == PlantKind::Nonlinear ? "nonlinear" : "linear-canonical";
}

inline const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Off: return "off";
    case ControllerKind::KnownExo: return "known-exo";
    default: return "uncertain";
  }
}

inline Summary summarize(const Scenario& sc, const RunResult& run) {
  Summary s;
  s.scenario = sc.name;
  s.plant = to_string(sc.plant);
  s.controller = to_string(sc.controller);
  s.grid_n = sc.grid_n;
  s.horizon = sc.horizon;
  s.dt = run.dt;
  s.steps = run.steps;
  s.log_stride = sc.log_stride;
  s.rho_star_outlet = equilibrium_density(sc.pipe, sc.pipe.length);
  s.settle_band_abs = sc.settle_band * s.rho_star_outlet;
  s.saturation_clamps = run.saturation_clamps;

  const auto& ts = run.ts;
  const double t_steady = 0.75 * ts.t.back();
  std::size_t last_out = ts.rows();  // last index whose deviation leaves the band
  for (std::size_t k = 0; k < ts.rows(); ++k) {
    const double dev = std::abs(ts.rho_out[k] - s.rho_star_outlet);
    s.peak_abs_outlet_dev = std::max(s.peak_abs_outlet_dev, dev);
    if (ts.t[k] >= t_steady) s.steady_residual = std::max(s.steady_residual, dev);
    if (dev > s.settle_band_abs) last_out = k;
  }
  if (last_out == ts.rows()) {
    s.settled = true;
    s.settle_time = ts.t.front();
  } else if (last_out + 1 < ts.rows()) {
    s.settled = true;
    s.settle_time = ts.t[last_out + 1];
  } else {
    s.settled = false;
    s.settle_time = -1.0;
  }
  return s;
}

inline nlohmann::ordered_json summary_to_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["plant"] = s.plant;
  j["controller"] = s.controller;
  j["grid_n"] = s.grid_n;
  j["horizon"] = s.horizon;
  j["dt"] = s.dt;
  j["steps"] = s.steps;
  j["log_stride"] = s.log_stride;
  j["rho_star_outlet"] = s.rho_star_outlet;
  j["peak_abs_outlet_dev"] = s.peak_abs_outlet_dev;
  j["steady_residual"] = s.steady_residual;
  j["settle_band_abs"] = s.settle_band_abs;
  j["settled"] = s.settled;
  if (s.settled)
    j["settle_time"] = s.settle_time;
  else
    j["settle_time"] = nullptr;
  j["saturation_clamps"] = s.saturation_clamps;
  return j;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw scenario_error("cannot write '" + path.string() + "'");
  return os;
}

}  // namespace detail

// Writes timeseries.csv, summary.json and the three station charts.
inline void write_outputs(const Scenario& sc, const RunResult& run, const Summary& summary,
                          const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw scenario_error("cannot create output directory '" + out_dir.string() + "'");

  {
    auto os = detail::open_out(out_dir / "timeseries.csv");
    write_csv(run.ts, os);
  }
  {
    auto os = detail::open_out(out_dir / "summary.json");
    os << summary_to_json(summary).dump(2) << '\n';
  }
  const auto& ts = run.ts;
  {
    auto os = detail::open_out(out_dir / "disturbance.svg");
    ChartSpec spec;
    spec.title = sc.name + ": outlet flux disturbance";
    spec.x_label = "t [s]";
    spec.y_label = "flux deviation [kg/(m^2 s)]";
    spec.x = &ts.t;
    spec.series = {{"s", &ts.s}, {"eps", &ts.eps}};
    write_line_chart(os, spec);
  }
  {
    auto os = detail::open_out(out_dir / "density.svg");
    ChartSpec spec;
    spec.title = sc.name + ": station densities";
    spec.x_label = "t [s]";
    spec.y_label = "density [kg/m^3]";
    spec.x = &ts.t;
    spec.series = {{"inlet", &ts.rho_in}, {"midpoint", &ts.rho_mid}, {"outlet", &ts.rho_out}};
    write_line_chart(os, spec);
  }
  {
    auto os = detail::open_out(out_dir / "flow.svg");
    ChartSpec spec;
    spec.title = sc.name + ": station mass fluxes";
    spec.x_label = "t [s]";
    spec.y_label = "mass flux [kg/(m^2 s)]";
    spec.x = &ts.t;
    spec.series = {{"inlet", &ts.phi_in}, {"midpoint", &ts.phi_mid}, {"outlet", &ts.phi_out}};
    write_line_chart(os, spec);
  }
}

struct RunArtifacts {
  RunResult run;
  Summary summary;
};

inline RunArtifacts run_scenario(const Scenario& sc) {
  RunArtifacts art;
  art.run = run_closed_loop(sc);
  art.summary = summarize(sc, art.run);
  return art;
}

inline RunArtifacts run_and_write(const Scenario& sc, const std::filesystem::path& out_dir) {
  RunArtifacts art = run_scenario(sc);
  write_outputs(sc, art.run, art.summary, out_dir);
  return art;
}

}  // namespace gasreg
