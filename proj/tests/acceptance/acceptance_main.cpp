// Release gate for the regulator library: nine end-to-end checks covering
// equilibrium fidelity, closed-loop tracking on both plant models, kernel
// solutions, exact transforms, generator arithmetic, estimator decay, and
// output repeatability. Each check prints one line and carries a wall-time
// budget; the process exits nonzero if any line reports FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gasreg/gasreg.hpp"

using namespace gasreg;

namespace {

std::string fmt(const char* spec, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, spec);
  std::vsnprintf(buf, sizeof(buf), spec, ap);
  va_end(ap);
  return buf;
}

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    ok = ok && cond;
    if (!detail.empty()) detail += "; ";
    if (!cond) detail += "MISSED ";
    detail += what;
  }
};

// Outlet-density deviation trace of one run.
struct OutletTrace {
  std::vector<double> t, dev;
  double peak = 0.0;

  double sup_after(double t0) const {
    double m = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] >= t0) m = std::max(m, std::abs(dev[k]));
    return m;
  }
};

OutletTrace outlet_trace(const Scenario& sc, const RunResult& run) {
  OutletTrace tr;
  const double ref = equilibrium_density(sc.pipe, sc.pipe.length);
  tr.t = run.ts.t;
  tr.dev.reserve(tr.t.size());
  for (double r : run.ts.rho_out) {
    tr.dev.push_back(r - ref);
    tr.peak = std::max(tr.peak, std::abs(r - ref));
  }
  return tr;
}

// Mean spacing of upward mean-crossings after t0; zero when fewer than two.
double oscillation_period(const OutletTrace& tr, double t0) {
  double mean = 0.0;
  int cnt = 0;
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    if (tr.t[k] >= t0) mean += tr.dev[k], ++cnt;
  if (cnt == 0) return 0.0;
  mean /= cnt;
  std::vector<double> ups;
  for (std::size_t k = 1; k < tr.t.size(); ++k) {
    if (tr.t[k] < t0) continue;
    const double a = tr.dev[k - 1] - mean, b = tr.dev[k] - mean;
    if (a < 0.0 && b >= 0.0)
      ups.push_back(tr.t[k - 1] + (tr.t[k] - tr.t[k - 1]) * (-a) / (b - a));
  }
  if (ups.size() < 2) return 0.0;
  return (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
}

// Least-squares slope of ln(y) against t over [t0, t1].
double log_slope(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t0 || t[k] > t1 || !(y[k] > 0.0)) continue;
    const double ly = std::log(y[k]);
    st += t[k];
    sy += ly;
    stt += t[k] * t[k];
    sty += t[k] * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sty - st * sy) / (n * stt - st * st);
}

// Settling allowance before steady metrics are read off: well past both the
// transport flush (~3 l/sigma) and the estimator decay at the default poles.
constexpr double kTransientCut = 3600.0;

// --- 1: the discrete steady profile is a fixed point of the full plant map.
Check steady_profile_hold() {
  Check c;
  const PipeParams p;
  const int n = 250;
  const auto rho_star = sample_equilibrium(p, n);
  PlantSim plant(p, n);
  const long steps = static_cast<long>(std::ceil(3600.0 / plant.dt()));
  double dev = 0.0;
  for (long k = 0; k < steps; ++k) {
    plant.step(p.inlet_density, p.outlet_flux);
    for (int i = 0; i <= n; ++i)
      dev = std::max(dev, std::abs(plant.rho()[static_cast<std::size_t>(i)] -
                                   rho_star[static_cast<std::size_t>(i)]));
  }
  c.require(dev <= 1e-3, fmt("max |rho - rho_star| %.3e kg/m^3 vs tol 1e-3 (N=250, 3600 s)", dev));
  return c;
}

// --- 2: tracking on the transport-exact plant model, with refinement gain.
Check linear_loop_tracking() {
  Check c;
  const PipeParams p;
  const double hold_from = 3.0 * p.length / p.wave_speed + 10.0;
  double resid[2] = {0.0, 0.0};
  int slot = 0;
  for (int n : {200, 400}) {
    auto open = preset_scenario("paper-iv-a-open");
    open.plant = PlantKind::LinearCanonical;
    open.grid_n = n;
    const auto open_tr = outlet_trace(open, run_closed_loop(open));

    auto closed = preset_scenario("paper-iv-a-closed");
    closed.plant = PlantKind::LinearCanonical;
    closed.grid_n = n;
    closed.saturate_control = false;
    const auto closed_tr = outlet_trace(closed, run_closed_loop(closed));

    resid[slot] = closed_tr.sup_after(hold_from);
    c.require(resid[slot] <= 0.01 * open_tr.peak,
              fmt("N=%d sup |drho_out| %.3e vs 1%% of open peak %.3e (t >= %.0f s)", n,
                  resid[slot], open_tr.peak, hold_from));
    ++slot;
  }
  const double ratio = resid[1] / resid[0];
  c.require(ratio >= 0.4 && ratio <= 0.7,
            fmt("residual ratio %.3f vs [0.4, 0.7] for N 200 -> 400", ratio));
  return c;
}

// --- 3: published draw cycle on the physical plant, open versus closed.
Check preset_a_regulation() {
  Check c;
  const auto open_sc = preset_scenario("paper-iv-a-open");
  const auto open_tr = outlet_trace(open_sc, run_closed_loop(open_sc));
  const double period = oscillation_period(open_tr, 2000.0);
  c.require(std::abs(period - 21600.0) <= 216.0,
            fmt("open-loop outlet period %.1f s vs 21600 +- 216", period));

  const auto closed_sc = preset_scenario("paper-iv-a-closed");
  const auto closed_tr = outlet_trace(closed_sc, run_closed_loop(closed_sc));
  const double band = 0.005 * equilibrium_density(closed_sc.pipe, closed_sc.pipe.length);
  const double resid = closed_tr.sup_after(kTransientCut);
  c.require(resid <= band,
            fmt("closed residual %.4g kg/m^3 vs 0.5%% band %.4g (t >= %.0f s)", resid, band,
                kTransientCut));
  c.require(resid * 10.0 <= open_tr.peak,
            fmt("reduction %.1fx vs 10x required (open peak %.4g)",
                resid > 0.0 ? open_tr.peak / resid : 0.0, open_tr.peak));
  return c;
}

// --- 4: cubic draw uncertainty on the physical plant, bound plus scaling.
Check preset_b_rejection() {
  Check c;
  const auto open_sc = preset_scenario("paper-iv-b-open");
  const auto open_tr = outlet_trace(open_sc, run_closed_loop(open_sc));
  const double open_resid = open_tr.sup_after(kTransientCut);

  const auto closed_sc = preset_scenario("paper-iv-b-closed");
  const auto closed_tr = outlet_trace(closed_sc, run_closed_loop(closed_sc));
  const double resid = closed_tr.sup_after(kTransientCut);
  c.require(std::isfinite(closed_tr.peak),
            fmt("closed-loop deviation bounded over the horizon (peak %.4g)", closed_tr.peak));
  c.require(resid * 5.0 <= open_resid,
            fmt("closed residual %.4g vs open/5 = %.4g", resid, open_resid / 5.0));

  auto doubled_sc = closed_sc;
  doubled_sc.unc.cubic_coeff *= 2.0;
  doubled_sc.unc.bound *= 2.0;
  const auto doubled_tr = outlet_trace(doubled_sc, run_closed_loop(doubled_sc));
  const double ratio = resid > 0.0 ? doubled_tr.sup_after(kTransientCut) / resid : 0.0;
  c.require(ratio <= 2.5, fmt("2x uncertainty residual ratio %.2f vs cap 2.5", ratio));
  return c;
}

// --- 5: kernel boundary data, refinement order, and the frictionless limit.
Check kernel_solutions() {
  Check c;
  const PipeParams p;
  const double q = p.length / p.wave_speed;

  const auto c200 = solve_controller_kernels(p, 200);
  const auto c400 = solve_controller_kernels(p, 400);
  const auto o200 = solve_observer_kernels(p, 200);
  const auto o400 = solve_observer_kernels(p, 400);

  const auto near = [](double a, double b) {
    return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b));
  };
  bool bc_ok = true;
  for (const auto* ck : {&c200, &c400}) {
    const int n = ck->k21.n;
    for (int i = 0; i <= n; ++i) {
      const auto mu = mu_coeffs(p, static_cast<double>(i) / n);
      bc_ok = bc_ok && near(ck->k21.at(i, i), -0.5 * q * mu.mu2);
      bc_ok = bc_ok && near(ck->k12.at(i, i), -0.5 * q * mu.mu1);
      bc_ok = bc_ok && near(ck->k22.at(i, 0), ck->k21.at(i, 0));
      bc_ok = bc_ok && near(ck->k11.at(i, 0), ck->k12.at(i, 0));
    }
  }
  for (const auto* ok : {&o200, &o400}) {
    const int n = ok->p21.n;
    for (int i = 0; i <= n; ++i) {
      const auto mu = mu_coeffs(p, static_cast<double>(i) / n);
      bc_ok = bc_ok && near(ok->p21.at(i, i), -0.5 * q * mu.mu2);
      bc_ok = bc_ok && near(ok->p12.at(i, i), -0.5 * q * mu.mu1);
      bc_ok = bc_ok && near(ok->p11.at(0, i), ok->p21.at(0, i));
      bc_ok = bc_ok && near(ok->p22.at(0, i), ok->p12.at(0, i));
    }
  }
  c.require(bc_ok, "boundary data exact at the nodes for all eight kernels");

  double worst_lo = 1.0, worst_hi = 0.0;
  for (auto which : {KernelPair::ControlBeta, KernelPair::ControlAlpha}) {
    const double r = kernel_residual(p, c400, which) / kernel_residual(p, c200, which);
    worst_lo = std::min(worst_lo, r);
    worst_hi = std::max(worst_hi, r);
  }
  for (auto which : {KernelPair::ObserverV, KernelPair::ObserverW}) {
    const double r = kernel_residual(p, o400, which) / kernel_residual(p, o200, which);
    worst_lo = std::min(worst_lo, r);
    worst_hi = std::max(worst_hi, r);
  }
  c.require(worst_lo >= 0.4 && worst_hi <= 0.7,
            fmt("interior residual ratios [%.3f, %.3f] vs [0.4, 0.7] for N 200 -> 400", worst_lo,
                worst_hi));

  PipeParams flat = p;
  flat.friction = 0.0;
  const auto cz = solve_controller_kernels(flat, 80);
  bool zeros = true;
  for (const auto* g : {&cz.k11, &cz.k12, &cz.k21, &cz.k22})
    for (double v : g->val) zeros = zeros && v == 0.0;
  c.require(zeros, "zero friction gives identically zero kernels");

  const auto exo = preset_scenario("paper-iv-a-closed").exo;
  const auto gain = feedback_gain(flat, exo, cz.k21);
  const double w = std::sqrt(-exo.a(1, 0));
  const double wq = w * flat.length / flat.wave_speed;
  const double g0 = std::cos(wq) / (2.0 * flat.wave_speed);
  const double g1 = std::sin(wq) / (w * 2.0 * flat.wave_speed);
  const bool gain_ok = std::abs(gain[0] - g0) <= 1e-12 * std::abs(g0) &&
                       std::abs(gain[1] - g1) <= 1e-12 * std::abs(g1);
  c.require(gain_ok, fmt("zero-friction gain matches the pure transport row (%.6e, %.6e)", g0, g1));
  return c;
}

// --- 6: the density/flux <-> characteristic map round-trips exactly.
Check riemann_round_trip() {
  Check c;
  const PipeParams p;
  std::mt19937 rng(20260814u);
  std::uniform_real_distribution<double> ux(0.0, p.length);
  std::uniform_real_distribution<double> ur(-5.0, 5.0);
  std::uniform_real_distribution<double> uf(-200.0, 200.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double x = ux(rng), drho = ur(rng), dphi = uf(rng);
    const auto rie = to_riemann(p, x, drho, dphi);
    const auto back = from_riemann(p, 1.0 - x / p.length, rie.v, rie.w);
    const double scale = std::max({std::abs(drho), std::abs(dphi) / p.wave_speed, 1e-12});
    worst = std::max(worst, std::abs(back.drho - drho) / scale);
    worst = std::max(worst, std::abs(back.dphi - dphi) / (scale * p.wave_speed));
  }
  c.require(worst <= 1e-12,
            fmt("worst relative round-trip error %.3e vs 1e-12 over 1000 samples", worst));
  return c;
}

// --- 7: generator flow is an exact semigroup producing the published cycle.
Check generator_exactness() {
  Check c;
  const auto exo = preset_scenario("paper-iv-a-open").exo;
  double semi = 0.0;
  for (double t1 : {13.7, 900.0, 21600.0})
    for (double t2 : {1.0, 4321.0, 43200.0}) {
      const lin::Mat lhs = exo_flow(exo, t1 + t2);
      const lin::Mat rhs = exo_flow(exo, t1) * exo_flow(exo, t2);
      for (int i = 0; i < lhs.rows(); ++i)
        for (int j = 0; j < lhs.cols(); ++j)
          semi = std::max(semi, std::abs(lhs(i, j) - rhs(i, j)));
    }
  c.require(semi <= 1e-10, fmt("semigroup gap %.3e vs 1e-10", semi));

  const double w = 2.0 * std::acos(-1.0) / 21600.0;
  const double amp = 0.6 * 289.0 / (2.0 * std::acos(-1.0));
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double t = 43200.0 * k / 2000.0;
    const double s = s_of(exo, step_exo(exo, exo.x0, t));
    worst = std::max(worst, std::abs(s - amp * std::sin(w * t)) / amp);
  }
  c.require(worst <= 1e-9,
            fmt("draw cycle off %.4f sin(2 pi t / 21600) by %.3e relative vs 1e-9", amp, worst));
  return c;
}

// --- 8: the draw estimator decays at the placed-pole rate.
Check draw_estimator_decay() {
  Check c;
  auto sc = preset_scenario("paper-iv-b-closed");
  sc.plant = PlantKind::LinearCanonical;
  sc.unc.kind = UncertaintyKind::None;
  sc.grid_n = 400;
  sc.horizon = 9000.0;
  sc.saturate_control = false;
  const auto run = run_closed_loop(sc);

  const auto poles = default_observer_poles(sc.exo);
  const auto h = place_injection_gain(sc.exo, sc.pipe.wave_speed, poles);
  const double margin = hurwitz_margin(sc.exo, sc.pipe.wave_speed, h);
  const double rate = -log_slope(run.ts.t, run.ts.err_x, 2000.0, 9000.0);
  c.require(rate >= 0.8 * margin,
            fmt("fitted decay %.4e 1/s >= 0.8 x pole margin %.4e", rate, margin));
  return c;
}

// --- 9: identical scenario, identical bytes.
Check repeatable_outputs() {
  Check c;
  for (const auto& name : preset_names()) {
    const auto sc = preset_scenario(name);
    std::ostringstream a, b;
    write_csv(run_closed_loop(sc).ts, a);
    write_csv(run_closed_loop(sc).ts, b);
    c.require(a.str() == b.str(), fmt("%s repeats byte-identically", name.c_str()));
  }
  return c;
}

}  // namespace

int main() {
  struct Gate {
    int id;
    const char* label;
    double budget_s;
    Check (*body)();
  };
  const Gate gates[] = {
      {1, "steady-profile-hold", 30.0, steady_profile_hold},
      {2, "linear-loop-tracking", 60.0, linear_loop_tracking},
      {3, "preset-a-regulation", 120.0, preset_a_regulation},
      {4, "preset-b-rejection", 120.0, preset_b_rejection},
      {5, "kernel-solutions", 20.0, kernel_solutions},
      {6, "riemann-round-trip", 1.0, riemann_round_trip},
      {7, "generator-exactness", 1.0, generator_exactness},
      {8, "draw-estimator-decay", 60.0, draw_estimator_decay},
      {9, "repeatable-outputs", 120.0, repeatable_outputs},
  };

  int failures = 0;
  for (const auto& g : gates) {
    const auto t0 = std::chrono::steady_clock::now();
    Check res;
    try {
      res = g.body();
    } catch (const std::exception& e) {
      res.ok = false;
      res.detail = fmt("exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.require(secs <= g.budget_s, fmt("%.1f s / %.0f s budget", secs, g.budget_s));
    std::printf("[ACCEPT] %d %-22s %s  %s\n", g.id, g.label, res.ok ? "PASS" : "FAIL",
                res.detail.c_str());
    std::fflush(stdout);
    if (!res.ok) ++failures;
  }
  std::printf("[ACCEPT] %d/9 criteria pass\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
