// Command line front end: run scenarios, export kernel grids, validate
// scenario files. Exit codes: 0 success, 2 validation problem, 3 numerical
// failure at run time.
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "gasreg/gasreg.hpp"

namespace fs = std::filesystem;

namespace {

void print_warnings(const gasreg::ValidationReport& report) {
  for (const auto& w : report.warnings) gasreg::logging::warn(w);
}

int cmd_run(const std::string& scenario_arg, const std::string& out_dir, int grid, double horizon,
            const std::string& plant) {
  gasreg::Scenario sc = gasreg::resolve_scenario(scenario_arg);
  if (grid > 0) sc.grid_n = grid;
  if (horizon > 0.0) sc.horizon = horizon;
  if (!plant.empty())
    sc.plant = plant == "nonlinear" ? gasreg::PlantKind::Nonlinear
                                    : gasreg::PlantKind::LinearCanonical;

  // run_closed_loop re-validates the overridden scenario and logs warnings.
  const auto art = gasreg::run_and_write(sc, out_dir);
  const auto& s = art.summary;
  std::printf("scenario %s: plant %s, controller %s, grid %d, dt %.6g s, %ld steps\n",
              s.scenario.c_str(), s.plant.c_str(), s.controller.c_str(), s.grid_n, s.dt, s.steps);
  std::printf("peak outlet deviation %.6g kg/m^3, steady residual %.6g kg/m^3\n",
              s.peak_abs_outlet_dev, s.steady_residual);
  if (s.settled)
    std::printf("settled into the %.3g kg/m^3 band at t = %.6g s\n", s.settle_band_abs,
                s.settle_time);
  else
    std::printf("did not settle into the %.3g kg/m^3 band\n", s.settle_band_abs);
  if (s.saturation_clamps > 0)
    std::printf("inlet command clamped on %d steps\n", s.saturation_clamps);
  std::printf("outputs written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_kernels(const std::string& scenario_arg, const std::string& out_dir) {
  const gasreg::Scenario sc = gasreg::resolve_scenario(scenario_arg);
  const int n = sc.grid_n;
  const auto ck = gasreg::solve_controller_kernels(sc.pipe, n);
  const auto ok = gasreg::solve_observer_kernels(sc.pipe, n);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw gasreg::scenario_error("cannot create output directory '" + out_dir + "'");

  const auto dump = [&](const char* name, const gasreg::KernelGrid& g) {
    std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
    if (!os) throw gasreg::scenario_error(std::string("cannot write '") + name + "'");
    gasreg::write_kernel_csv(g, os);
  };
  dump("controller_k11.csv", ck.k11);
  dump("controller_k12.csv", ck.k12);
  dump("controller_k21.csv", ck.k21);
  dump("controller_k22.csv", ck.k22);
  dump("observer_p11.csv", ok.p11);
  dump("observer_p12.csv", ok.p12);
  dump("observer_p21.csv", ok.p21);
  dump("observer_p22.csv", ok.p22);

  std::printf("kernel grids for %s at n = %d: controller %d sweeps, observer %d sweeps\n",
              sc.name.c_str(), n, ck.report.sweeps, ok.report.sweeps);
  std::printf("outputs written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_validate(const std::string& scenario_arg) {
  const gasreg::Scenario sc = gasreg::resolve_scenario(scenario_arg);
  print_warnings(gasreg::validate_scenario(sc));
  std::printf("OK: %s (plant %s, controller %s, grid %d, horizon %.6g s)\n", sc.name.c_str(),
              gasreg::to_string(sc.plant), gasreg::to_string(sc.controller), sc.grid_n, sc.horizon);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gas pipeline outlet density regulation"};
  app.require_subcommand(1);

  std::string scenario_arg, out_dir, plant;
  int grid = 0;
  double horizon = 0.0;

  auto* run = app.add_subcommand("run", "Simulate a scenario and write its outputs");
  run->add_option("scenario", scenario_arg, "Preset name or scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--grid", grid, "Override the grid cell count")
      ->check(CLI::PositiveNumber);
  run->add_option("--horizon", horizon, "Override the horizon [s]")
      ->check(CLI::PositiveNumber);
  run->add_option("--plant", plant, "Override the plant model")
      ->check(CLI::IsMember({"nonlinear", "linear", "linear-canonical"}));

  auto* kernels = app.add_subcommand("kernels", "Export backstepping kernel grids as CSV");
  kernels->add_option("scenario", scenario_arg, "Preset name or scenario JSON file")->required();
  kernels->add_option("--out", out_dir, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Check a scenario file and report problems");
  validate->add_option("scenario", scenario_arg, "Preset name or scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_arg, out_dir, grid, horizon, plant);
    if (kernels->parsed()) return cmd_kernels(scenario_arg, out_dir);
    return cmd_validate(scenario_arg);
  } catch (const gasreg::numeric_failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const gasreg::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
