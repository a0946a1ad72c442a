#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gasreg/errors.hpp"
#include "gasreg/exosystem.hpp"
#include "gasreg/pipeline.hpp"

namespace gasreg {

enum class PlantKind { Nonlinear, LinearCanonical };
enum class ControllerKind { Off, KnownExo, Uncertain };
enum class ObserverInit { Zero, Truth };

// Everything needed to reproduce one run.
struct Scenario {
  std::string name = "custom";
  PipeParams pipe{};
  Exosystem exo{};
  Uncertainty unc{};
  ControllerKind controller = ControllerKind::Off;
  PlantKind plant = PlantKind::Nonlinear;
  int grid_n = 200;
  double horizon = 3600.0;
  int log_stride = 1;
  ObserverInit observer_init = ObserverInit::Zero;
  // Empty means the default spread derived from the generator spectrum.
  std::vector<lin::cplx> h_poles;
  double dt_factor = 0.9;
  // Fraction of the outlet setpoint density used as the settling band.
  double settle_band = 0.005;
  // Clamp |dU| at half the inlet setpoint (nonlinear plant runs only).
  bool saturate_control = true;
};

struct ValidationReport {
  std::vector<std::string> warnings;
};

// Throws on hard errors; returns soft warnings (also logged by callers).
inline ValidationReport validate_scenario(const Scenario& sc) {
  ValidationReport report;
  validate_pipe(sc.pipe);
  if (sc.exo.dim() < 1) throw invalid_input("scenario: exosystem is missing");
  if (sc.exo.a.rows() != sc.exo.a.cols() || static_cast<int>(sc.exo.c.size()) != sc.exo.dim() ||
      static_cast<int>(sc.exo.x0.size()) != sc.exo.dim())
    throw invalid_input("scenario: exosystem shapes are inconsistent");
  validate_uncertainty(sc.unc);
  if (!(sc.horizon > 0.0) || !std::isfinite(sc.horizon))
    throw invalid_input("scenario: horizon must be positive");
  if (sc.grid_n < 32) throw invalid_input("scenario: grid_n must be at least 32");
  if (sc.log_stride < 1) throw invalid_input("scenario: log_stride must be at least 1");
  if (!(sc.dt_factor > 0.0) || sc.dt_factor > 0.95)
    throw cfl_violation("scenario: dt_factor must lie in (0, 0.95]");
  if (!(sc.settle_band > 0.0) || !(sc.settle_band < 1.0))
    throw invalid_input("scenario: settle_band must lie in (0, 1)");
  if (!sc.h_poles.empty() && static_cast<int>(sc.h_poles.size()) != sc.exo.dim())
    throw invalid_input("scenario: h_poles must be empty or match the exosystem dimension");

  // The feedback design linearizes around the steady profile. The observer
  // carries no model of the quadratic friction, so its estimation error grows
  // with draw amplitude squared and biases the feedback integral; measured
  // railing on the physical plant starts near 4% of nominal flux. Open-loop
  // and linear-plant runs are unaffected at any amplitude.
  double s_peak = 0.0;
  {
    const int samples = 512;
    const double step = sc.horizon / samples;
    const lin::Mat hop = exo_flow(sc.exo, step);
    std::vector<double> x = sc.exo.x0;
    for (int k = 0; k <= samples; ++k) {
      s_peak = std::max(s_peak, std::abs(s_of(sc.exo, x)));
      x = hop * x;
    }
  }
  double draw_peak = s_peak;
  if (sc.unc.kind == UncertaintyKind::CubicOfS)
    draw_peak += std::abs(sc.unc.cubic_coeff) * s_peak * s_peak * s_peak;
  if (sc.controller != ControllerKind::Off && sc.plant == PlantKind::Nonlinear &&
      draw_peak > 0.04 * sc.pipe.outlet_flux) {
    char msg[200];
    std::snprintf(msg, sizeof(msg),
                  "outlet draw peak %.4g exceeds 4%% of the nominal flux %.4g; estimation "
                  "bias from the unmodeled quadratic friction can rail the closed loop",
                  draw_peak, sc.pipe.outlet_flux);
    report.warnings.emplace_back(msg);
  }

  // Feedback on the physical plant needs the inlet coupling layer resolved:
  // the second-order plant stencil and the first-order observer stencil
  // disagree there by O(1/grid_n), and on coarse grids that mismatch can
  // overcome the closed-loop stability margin.
  if (sc.plant == PlantKind::Nonlinear && sc.controller != ControllerKind::Off &&
      sc.grid_n < 200) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "grid_n %d is coarse for feedback on the physical plant; the loop may "
                  "go unstable below about 200 cells",
                  sc.grid_n);
    report.warnings.emplace_back(msg);
  }
  return report;
}

inline std::vector<std::string> preset_names() {
  return {"paper-iv-a-open", "paper-iv-a-closed", "paper-iv-b-open", "paper-iv-b-closed"};
}

// The 6 h draw cycle used by the bundled scenarios: a harmonic generator
// whose output ramps the outlet flux by 10% of nominal per hour at peak
// slope, started at the zero crossing.
inline Exosystem reference_generator(const PipeParams& p) {
  const double w = 2.0 * std::acos(-1.0) / 21600.0;
  return make_exosystem(lin::Mat{{0.0, 1.0}, {-w * w, 0.0}}, {1.0, 0.0},
                        {0.0, 0.1 * p.outlet_flux / 3600.0});
}

// Bundled study scenarios: a 6 h sinusoidal draw cycle on the default
// pipe, open or closed loop, without (a) or with (b) the cubic
// unpredictable component.
inline Scenario preset_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  const double w = 2.0 * std::acos(-1.0) / 21600.0;
  sc.exo = reference_generator(sc.pipe);
  sc.plant = PlantKind::Nonlinear;
  sc.grid_n = 250;
  sc.horizon = 43200.0;
  sc.log_stride = 42;

  const auto cubic = [&] {
    Uncertainty u;
    u.kind = UncertaintyKind::CubicOfS;
    u.cubic_coeff = 1e-3;
    const double s_peak = 0.1 * sc.pipe.outlet_flux / 3600.0 / w;
    u.bound = u.cubic_coeff * s_peak * s_peak * s_peak;
    return u;
  };

  if (name == "paper-iv-a-open") {
    sc.controller = ControllerKind::Off;
  } else if (name == "paper-iv-a-closed") {
    sc.controller = ControllerKind::KnownExo;
  } else if (name == "paper-iv-b-open") {
    sc.controller = ControllerKind::Off;
    sc.unc = cubic();
  } else if (name == "paper-iv-b-closed") {
    sc.controller = ControllerKind::Uncertain;
    sc.unc = cubic();
  } else {
    std::string msg = "unknown preset '" + name + "'; available:";
    for (const auto& p : preset_names()) msg += " " + p;
    throw invalid_input(msg);
  }
  return sc;
}

}  // namespace gasreg
