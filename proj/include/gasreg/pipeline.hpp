#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gasreg/errors.hpp"

namespace gasreg {

// Static description of one horizontal pipe operated around a steady flow:
// nominal outlet mass flux plus an inlet density setpoint.
struct PipeParams {
  double friction = 0.011;      // Darcy friction factor
  double wave_speed = 378.0;    // isothermal sound speed [m/s]
  double diameter = 0.5;        // [m]
  double length = 25000.0;      // [m]
  double outlet_flux = 289.0;   // nominal mass flux [kg m^-2 s^-1]
  double inlet_density = 46.0;  // inlet density setpoint [kg m^-3]
};

// Slope of the squared steady density profile: rho*(x)^2 is affine in x.
inline double density_square_slope(const PipeParams& p) {
  return p.friction * p.outlet_flux * p.outlet_flux / (p.wave_speed * p.wave_speed * p.diameter);
}

// Inlet density headroom above the smallest setpoint that still pushes the
// nominal flux through the whole line. Negative means no steady state.
inline double feasibility_margin(const PipeParams& p) {
  return p.inlet_density - std::sqrt(density_square_slope(p) * p.length);
}

inline void validate_pipe(const PipeParams& p) {
  const auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw invalid_input(std::string(what) + " must be positive and finite");
  };
  if (!(p.friction >= 0.0) || !std::isfinite(p.friction))
    throw invalid_input("friction factor must be nonnegative and finite");
  positive(p.wave_speed, "wave speed");
  positive(p.diameter, "diameter");
  positive(p.length, "length");
  positive(p.outlet_flux, "outlet flux");
  positive(p.inlet_density, "inlet density setpoint");
  if (!(feasibility_margin(p) > 0.0)) {
    const double bound = std::sqrt(density_square_slope(p) * p.length);
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "inlet density setpoint %.6g cannot sustain the nominal flux; it must exceed %.6g",
                  p.inlet_density, bound);
    throw infeasible_equilibrium(msg);
  }
}

// Steady density at position x in [0, length].
inline double equilibrium_density(const PipeParams& p, double x) {
  if (!(x >= 0.0 && x <= p.length)) throw invalid_input("position outside the pipe");
  return std::sqrt(p.inlet_density * p.inlet_density - density_square_slope(p) * x);
}

// Steady densities at the n+1 uniform grid nodes.
inline std::vector<double> sample_equilibrium(const PipeParams& p, int n) {
  if (n < 1) throw invalid_input("grid needs at least one cell");
  std::vector<double> rho(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) rho[static_cast<std::size_t>(i)] = equilibrium_density(p, p.length * i / n);
  return rho;
}

// Friction linearization weights around the steady state at position x.
struct LambdaCoeffs {
  double lam1, lam2;
};

inline LambdaCoeffs lambda_coeffs(const PipeParams& p, double x) {
  const double rho = equilibrium_density(p, x);
  const double phi = p.outlet_flux;
  return {p.friction * phi * phi / (2.0 * p.diameter * rho * rho),
          p.friction * phi / (p.diameter * rho)};
}

// Map between pipe position x and the reversed unit coordinate used by the
// transformed transport system (0 at the outlet, 1 at the inlet).
inline double xbar_of_x(const PipeParams& p, double x) {
  if (!(x >= 0.0 && x <= p.length)) throw invalid_input("position outside the pipe");
  return (p.length - x) / p.length;
}

inline double x_of_xbar(const PipeParams& p, double xbar) {
  if (!(xbar >= 0.0 && xbar <= 1.0)) throw invalid_input("unit coordinate outside [0, 1]");
  return p.length * (1.0 - xbar);
}

namespace detail {

// Exponential decoupling weight e^{(sigma/phi_L)(rho*(x) - rho*(l))}.
inline double riemann_exp_weight(const PipeParams& p, double x) {
  const double drho = equilibrium_density(p, x) - equilibrium_density(p, p.length);
  return std::exp(p.wave_speed / p.outlet_flux * drho);
}

// Amplitude weight sqrt(rho*(x) / rho*(l)).
inline double riemann_amp_weight(const PipeParams& p, double x) {
  return std::sqrt(equilibrium_density(p, x) / equilibrium_density(p, p.length));
}

}  // namespace detail

// Coupling coefficients of the transformed transport system, as functions
// of the reversed unit coordinate.
struct MuCoeffs {
  double mu1, mu2;
};

inline MuCoeffs mu_coeffs(const PipeParams& p, double xbar) {
  const double x = x_of_xbar(p, xbar);
  const double rho = equilibrium_density(p, x);
  const double phi = p.outlet_flux;
  const double sig = p.wave_speed;
  const double common = p.friction * phi * phi / (4.0 * sig * p.diameter * rho * rho);
  const double swing = p.friction * phi / (2.0 * p.diameter * rho);
  const double e = detail::riemann_exp_weight(p, x);
  return {(common - swing) * e * e, (common + swing) / (e * e)};
}

// Boundary reflection coefficients tying the transformed fields to the
// physical inlet density command.
struct ReflectionCoeffs {
  double r1, r2;
};

inline ReflectionCoeffs reflection_coeffs(const PipeParams& p) {
  const double e0 = detail::riemann_exp_weight(p, 0.0);
  return {1.0 / (e0 * e0), detail::riemann_amp_weight(p, 0.0) / e0};
}

// Characteristic pair (v, w) of the transformed transport system.
struct Riemann {
  double v, w;
};

// Density and flux deviations from the steady profile.
struct Deviation {
  double drho, dphi;
};

inline Riemann to_riemann(const PipeParams& p, double x, double drho, double dphi) {
  const double g = detail::riemann_amp_weight(p, x);
  const double e = detail::riemann_exp_weight(p, x);
  const double half_minus = 0.5 * drho - dphi / (2.0 * p.wave_speed);
  const double half_plus = 0.5 * drho + dphi / (2.0 * p.wave_speed);
  return {g * e * half_minus, g / e * half_plus};
}

inline Deviation from_riemann(const PipeParams& p, double xbar, double v, double w) {
  const double x = x_of_xbar(p, xbar);
  const double g = detail::riemann_amp_weight(p, x);
  const double e = detail::riemann_exp_weight(p, x);
  const double lo = v / (g * e);
  const double hi = w * e / g;
  return {lo + hi, p.wave_speed * (hi - lo)};
}

}  // namespace gasreg
