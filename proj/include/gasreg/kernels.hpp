#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "gasreg/errors.hpp"
#include "gasreg/exosystem.hpp"
#include "gasreg/linalg.hpp"
#include "gasreg/pipeline.hpp"

namespace gasreg {

// One kernel sampled on the uniform unit triangle with n cells per side.
// Lower grids live on {0 <= xi <= xbar <= 1}, upper grids on
// {0 <= xbar <= xi <= 1}; entries outside the triangle stay zero.
struct KernelGrid {
  int n = 0;
  bool lower = true;
  std::vector<double> val;

  KernelGrid() = default;
  KernelGrid(int cells, bool lower_triangle)
      : n(cells), lower(lower_triangle),
        val(static_cast<std::size_t>(cells + 1) * (cells + 1), 0.0) {}

  double h() const { return 1.0 / n; }
  double& at(int i, int j) { return val[static_cast<std::size_t>(i) * (n + 1) + j]; }
  double at(int i, int j) const { return val[static_cast<std::size_t>(i) * (n + 1) + j]; }
  bool inside(int i, int j) const { return lower ? j <= i : j >= i; }
};

struct SolveReport {
  int sweeps = 0;
  std::vector<double> deltas;  // sup-norm update size after each sweep
};

struct ControllerKernels {
  KernelGrid k11, k12, k21, k22;
  SolveReport report;
};

struct ObserverKernels {
  KernelGrid p11, p12, p21, p22;
  SolveReport report;
};

struct SweepOptions {
  double tol = 1e-12;
  int max_sweeps = 200;
};

namespace detail {

// Coefficient samples on the half-step grid: entry k holds the value at
// k * h / 2, so integer nodes and characteristic midpoints share one table.
struct HalfGridCoeffs {
  std::vector<double> c1, c2;
};

inline HalfGridCoeffs sample_mu_half_grid(const PipeParams& p, int n) {
  HalfGridCoeffs out;
  out.c1.resize(static_cast<std::size_t>(2 * n) + 1);
  out.c2.resize(static_cast<std::size_t>(2 * n) + 1);
  for (int k = 0; k <= 2 * n; ++k) {
    const auto m = mu_coeffs(p, 0.5 * k / n);
    out.c1[static_cast<std::size_t>(k)] = m.mu1;
    out.c2[static_cast<std::size_t>(k)] = m.mu2;
  }
  return out;
}

// One Gauss-Seidel sweep of a coupled kernel pair on the lower triangle.
// d is anchored on the diagonal with data -(q/2) cd and marched along the
// characteristic direction (1, -1) against e frozen from the last sweep;
// e is anchored on the edge xi = 0 by e = d and marched along (1, 1)
// against the freshly updated d. Path integrals use the anchor-side
// endpoint rule, which keeps the whole scheme first order. cd and ce are
// half-grid tables evaluated in the xi argument.
inline void sweep_lower(KernelGrid& d, KernelGrid& e, const KernelGrid& e_old,
                        const std::vector<double>& cd, const std::vector<double>& ce, double q) {
  const int n = d.n;
  const double h = d.h();
  const double step = q * h;
  for (int i = 0; i <= n; ++i) d.at(i, i) = -0.5 * q * cd[static_cast<std::size_t>(2 * i)];
  for (int i = 1; i <= n; ++i) {
    {
      // Half segment from the analytic diagonal anchor between nodes.
      const double cmid = cd[static_cast<std::size_t>(2 * i - 1)];
      const double emid = 0.5 * (e_old.at(i - 1, i - 1) + e_old.at(i, i));
      d.at(i, i - 1) = -0.5 * q * cmid + 0.5 * step * cmid * emid;
    }
    for (int j = i - 2; j >= 0; --j)
      d.at(i, j) = d.at(i - 1, j + 1) + step * cd[static_cast<std::size_t>(2 * (j + 1))] * e_old.at(i - 1, j + 1);
  }
  for (int i = 0; i <= n; ++i) e.at(i, 0) = d.at(i, 0);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= i; ++j)
      e.at(i, j) = e.at(i - 1, j - 1) - step * ce[static_cast<std::size_t>(2 * (j - 1))] * d.at(i - 1, j - 1);
}

// Mirror sweep on the upper triangle; the anchored edge is xbar = 0 and
// the coefficient tables are evaluated in the xbar argument.
inline void sweep_upper(KernelGrid& d, KernelGrid& e, const KernelGrid& e_old,
                        const std::vector<double>& cd, const std::vector<double>& ce, double q) {
  const int n = d.n;
  const double h = d.h();
  const double step = q * h;
  for (int i = 0; i <= n; ++i) d.at(i, i) = -0.5 * q * cd[static_cast<std::size_t>(2 * i)];
  for (int i = n - 1; i >= 0; --i) {
    {
      const double cmid = cd[static_cast<std::size_t>(2 * i + 1)];
      const double emid = 0.5 * (e_old.at(i, i) + e_old.at(i + 1, i + 1));
      d.at(i, i + 1) = -0.5 * q * cmid + 0.5 * step * cmid * emid;
    }
    for (int j = i + 2; j <= n; ++j)
      d.at(i, j) = d.at(i + 1, j - 1) + step * cd[static_cast<std::size_t>(2 * (i + 1))] * e_old.at(i + 1, j - 1);
  }
  for (int j = 0; j <= n; ++j) e.at(0, j) = d.at(0, j);
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j)
      e.at(i, j) = e.at(i - 1, j - 1) - step * ce[static_cast<std::size_t>(2 * (i - 1))] * d.at(i - 1, j - 1);
}

inline double grid_gap(const KernelGrid& a, const KernelGrid& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.val.size(); ++k) worst = std::max(worst, std::abs(a.val[k] - b.val[k]));
  return worst;
}

template <typename Sweep>
inline SolveReport iterate_pair(KernelGrid& d, KernelGrid& e, const std::vector<double>& cd,
                                const std::vector<double>& ce, double q, const SweepOptions& opt,
                                Sweep sweep) {
  SolveReport report;
  KernelGrid d_old = d, e_old = e;
  for (int s = 1; s <= opt.max_sweeps; ++s) {
    sweep(d, e, e_old, cd, ce, q);
    const double delta = std::max(grid_gap(d, d_old), grid_gap(e, e_old));
    report.sweeps = s;
    report.deltas.push_back(delta);
    if (delta <= opt.tol) return report;
    d_old = d;
    e_old = e;
  }
  char msg[128];
  std::snprintf(msg, sizeof(msg), "kernel fixed point did not reach %.3g in %d sweeps (last delta %.3g)",
                opt.tol, opt.max_sweeps, report.deltas.back());
  throw solver_divergence(msg);
}

inline SolveReport merge_reports(SolveReport a, const SolveReport& b) {
  a.sweeps = std::max(a.sweeps, b.sweeps);
  if (b.deltas.size() > a.deltas.size()) a.deltas.resize(b.deltas.size(), 0.0);
  for (std::size_t k = 0; k < b.deltas.size(); ++k) a.deltas[k] = std::max(a.deltas[k], b.deltas[k]);
  return a;
}

}  // namespace detail

// Kernels of the state-feedback transform, solved to the fixed point of
// the characteristic marching maps. Throws solver_divergence if the sweep
// budget runs out.
inline ControllerKernels solve_controller_kernels(const PipeParams& p, int n,
                                                  const SweepOptions& opt = {}) {
  validate_pipe(p);
  if (n < 2) throw invalid_input("kernel grid needs at least two cells");
  const auto mu = detail::sample_mu_half_grid(p, n);
  const double q = p.length / p.wave_speed;
  ControllerKernels out;
  out.k21 = KernelGrid(n, true);
  out.k22 = KernelGrid(n, true);
  out.k12 = KernelGrid(n, true);
  out.k11 = KernelGrid(n, true);
  const auto rep_a = detail::iterate_pair(out.k21, out.k22, mu.c2, mu.c1, q, opt,
                                          [](auto&... args) { detail::sweep_lower(args...); });
  const auto rep_b = detail::iterate_pair(out.k12, out.k11, mu.c1, mu.c2, q, opt,
                                          [](auto&... args) { detail::sweep_lower(args...); });
  out.report = detail::merge_reports(rep_a, rep_b);
  return out;
}

// Kernels of the output-injection transform on the upper triangle.
inline ObserverKernels solve_observer_kernels(const PipeParams& p, int n,
                                              const SweepOptions& opt = {}) {
  validate_pipe(p);
  if (n < 2) throw invalid_input("kernel grid needs at least two cells");
  const auto mu = detail::sample_mu_half_grid(p, n);
  const double q = p.length / p.wave_speed;
  ObserverKernels out;
  out.p21 = KernelGrid(n, false);
  out.p11 = KernelGrid(n, false);
  out.p12 = KernelGrid(n, false);
  out.p22 = KernelGrid(n, false);
  const auto rep_a = detail::iterate_pair(out.p21, out.p11, mu.c2, mu.c1, q, opt,
                                          [](auto&... args) { detail::sweep_upper(args...); });
  const auto rep_b = detail::iterate_pair(out.p12, out.p22, mu.c1, mu.c2, q, opt,
                                          [](auto&... args) { detail::sweep_upper(args...); });
  out.report = detail::merge_reports(rep_a, rep_b);
  return out;
}

enum class KernelPair { ControlBeta, ControlAlpha, ObserverV, ObserverW };

namespace detail {

struct PairSpec {
  const KernelGrid* d;
  const KernelGrid* e;
  bool lower;
  bool coeff_in_xbar;  // otherwise evaluated in xi
  const std::vector<double>* cd;
  const std::vector<double>* ce;
};

// Max centered-difference residual of both transport equations of a pair
// over strictly interior nodes. First-order solves give O(h) residuals
// that halve under grid doubling.
inline double pair_residual(const PairSpec& sp, double q) {
  const int n = sp.d->n;
  const double h = sp.d->h();
  const auto cd_at = [&](int i, int j) {
    return (*sp.cd)[static_cast<std::size_t>(2 * (sp.coeff_in_xbar ? i : j))];
  };
  const auto ce_at = [&](int i, int j) {
    return (*sp.ce)[static_cast<std::size_t>(2 * (sp.coeff_in_xbar ? i : j))];
  };
  const double dsign = sp.lower ? 1.0 : -1.0;  // d equation: d_xbar - d_xi = dsign * q * cd * e
  double worst = 0.0;
  const auto dbar = [&](const KernelGrid& g, int i, int j) { return (g.at(i + 1, j) - g.at(i - 1, j)) / (2.0 * h); };
  const auto dxi = [&](const KernelGrid& g, int i, int j) { return (g.at(i, j + 1) - g.at(i, j - 1)) / (2.0 * h); };
  if (sp.lower) {
    for (int i = 2; i < n; ++i)
      for (int j = 1; j <= i - 1; ++j) {
        const double rd = dbar(*sp.d, i, j) - dxi(*sp.d, i, j) - dsign * q * cd_at(i, j) * sp.e->at(i, j);
        const double re = dbar(*sp.e, i, j) + dxi(*sp.e, i, j) + q * ce_at(i, j) * sp.d->at(i, j);
        worst = std::max({worst, std::abs(rd), std::abs(re)});
      }
  } else {
    for (int i = 1; i + 1 < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double rd = dbar(*sp.d, i, j) - dxi(*sp.d, i, j) - dsign * q * cd_at(i, j) * sp.e->at(i, j);
        const double re = dbar(*sp.e, i, j) + dxi(*sp.e, i, j) + q * ce_at(i, j) * sp.d->at(i, j);
        worst = std::max({worst, std::abs(rd), std::abs(re)});
      }
  }
  return worst;
}

}  // namespace detail

inline double kernel_residual(const PipeParams& p, const ControllerKernels& k, KernelPair which) {
  const auto mu = detail::sample_mu_half_grid(p, k.k21.n);
  const double q = p.length / p.wave_speed;
  detail::PairSpec sp{};
  sp.lower = true;
  sp.coeff_in_xbar = false;
  if (which == KernelPair::ControlBeta) {
    sp.d = &k.k21;
    sp.e = &k.k22;
    sp.cd = &mu.c2;
    sp.ce = &mu.c1;
  } else if (which == KernelPair::ControlAlpha) {
    sp.d = &k.k12;
    sp.e = &k.k11;
    sp.cd = &mu.c1;
    sp.ce = &mu.c2;
  } else {
    throw invalid_input("kernel_residual: pair does not belong to the state-feedback set");
  }
  return detail::pair_residual(sp, q);
}

inline double kernel_residual(const PipeParams& p, const ObserverKernels& k, KernelPair which) {
  const auto mu = detail::sample_mu_half_grid(p, k.p11.n);
  const double q = p.length / p.wave_speed;
  detail::PairSpec sp{};
  sp.lower = false;
  sp.coeff_in_xbar = true;
  if (which == KernelPair::ObserverV) {
    sp.d = &k.p21;
    sp.e = &k.p11;
    sp.cd = &mu.c2;
    sp.ce = &mu.c1;
  } else if (which == KernelPair::ObserverW) {
    sp.d = &k.p12;
    sp.e = &k.p22;
    sp.cd = &mu.c1;
    sp.ce = &mu.c2;
  } else {
    throw invalid_input("kernel_residual: pair does not belong to the output-injection set");
  }
  return detail::pair_residual(sp, q);
}

// Row vector multiplying the generator state in the boundary control law.
inline std::vector<double> feedback_gain(const PipeParams& p, const Exosystem& exo,
                                         const KernelGrid& k21) {
  if (!k21.lower || k21.n < 2) throw invalid_input("feedback gain needs the lower-triangle k21 kernel");
  const int n = k21.n;
  const int m = exo.dim();
  const double q = p.length / p.wave_speed;
  const double sig = p.wave_speed;
  const lin::Mat hop = lin::matrix_exp(exo.a, q / n);

  // Rows c * e^{a q (1 - tau_k)} accumulated from tau = 1 downward, plus
  // the trapezoid sum of k21(tau, 0) against them.
  std::vector<double> row = exo.c;
  std::vector<double> integral(static_cast<std::size_t>(m), 0.0);
  const double h = 1.0 / n;
  for (int k = n; k >= 0; --k) {
    const double wgt = (k == 0 || k == n) ? 0.5 : 1.0;
    for (int j = 0; j < m; ++j) integral[static_cast<std::size_t>(j)] += wgt * h * k21.at(k, 0) * row[static_cast<std::size_t>(j)];
    if (k > 0) {
      std::vector<double> next(static_cast<std::size_t>(m), 0.0);
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += row[static_cast<std::size_t>(i)] * hop(i, j);
        next[static_cast<std::size_t>(j)] = acc;
      }
      row = std::move(next);
    }
  }
  // After the loop, row = c e^{a q}.
  std::vector<double> gain(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j)
    gain[static_cast<std::size_t>(j)] =
        row[static_cast<std::size_t>(j)] / (2.0 * sig) - integral[static_cast<std::size_t>(j)] / sig;
  return gain;
}

// Output-injection gain profiles for the observer driven by the measured
// incoming characteristic at the inlet end.
struct ObserverGains {
  std::vector<double> p1, p2;
};

// Gains for the observer that trusts the generator state (it is supplied
// externally), so only the boundary trace of the kernels enters.
inline ObserverGains observer_gains_known(const PipeParams& p, const ObserverKernels& k) {
  const int n = k.p11.n;
  const double so_l = p.wave_speed / p.length;
  ObserverGains g;
  g.p1.resize(static_cast<std::size_t>(n) + 1);
  g.p2.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    g.p1[static_cast<std::size_t>(i)] = -so_l * k.p11.at(i, n);
    g.p2[static_cast<std::size_t>(i)] = -so_l * k.p21.at(i, n);
  }
  return g;
}

// Gains for the observer that estimates the generator state as well. The
// injection gain h must make a + h c / sigma Hurwitz.
inline ObserverGains observer_gains_uncertain(const PipeParams& p, const Exosystem& exo,
                                              const std::vector<double>& h,
                                              const ObserverKernels& k) {
  if (static_cast<int>(h.size()) != exo.dim())
    throw invalid_input("observer gains: injection gain size must match the generator dimension");
  const double margin = hurwitz_margin(exo, p.wave_speed, h);
  if (!(margin > 0.0)) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "observer gains: injection gain leaves the generator estimator unstable (margin %.3g)",
                  margin);
    throw invalid_input(msg);
  }
  const int n = k.p11.n;
  const double sig = p.wave_speed;
  const double so_l = sig / p.length;
  const double q = p.length / sig;
  const double hstep = 1.0 / n;

  // gsig[k] = c e^{a q (1 - xi_k)} h.
  std::vector<double> gsig(static_cast<std::size_t>(n) + 1, 0.0);
  const lin::Mat hop = lin::matrix_exp(exo.a, q / n);
  std::vector<double> vec = h;
  for (int kk = n; kk >= 0; --kk) {
    gsig[static_cast<std::size_t>(kk)] = lin::dot(exo.c, vec);
    if (kk > 0) vec = hop * vec;
  }
  ObserverGains g;
  g.p1.resize(static_cast<std::size_t>(n) + 1);
  g.p2.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    double int1 = 0.0, int2 = 0.0;
    for (int j = i; j <= n && i < n; ++j) {
      const double wgt = (j == i || j == n) ? 0.5 : 1.0;
      int1 += wgt * hstep * k.p11.at(i, j) * gsig[static_cast<std::size_t>(j)];
      int2 += wgt * hstep * k.p21.at(i, j) * gsig[static_cast<std::size_t>(j)];
    }
    // The distributed part -c e^{a q (1 - xbar)} h / sigma turns the
    // measurement-to-estimate delay loop into a copy of a + h c / sigma.
    g.p1[static_cast<std::size_t>(i)] =
        -gsig[static_cast<std::size_t>(i)] / sig - so_l * k.p11.at(i, n) + int1 / sig;
    g.p2[static_cast<std::size_t>(i)] = -so_l * k.p21.at(i, n) + int2 / sig;
  }
  return g;
}

// Writes one kernel as "xbar,xi,value" rows over its triangle.
inline void write_kernel_csv(const KernelGrid& g, std::ostream& os) {
  os << "xbar,xi,value\n";
  char line[96];
  for (int i = 0; i <= g.n; ++i) {
    const int j0 = g.lower ? 0 : i;
    const int j1 = g.lower ? i : g.n;
    for (int j = j0; j <= j1; ++j) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", static_cast<double>(i) / g.n,
                    static_cast<double>(j) / g.n, g.at(i, j));
      os << line;
    }
  }
}

}  // namespace gasreg
