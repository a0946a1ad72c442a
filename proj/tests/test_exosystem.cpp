#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "gasreg/errors.hpp"
#include "gasreg/exosystem.hpp"

using gasreg::Exosystem;
using gasreg::lin::cplx;
using gasreg::lin::Mat;

namespace {

// 6 h sinusoid with the amplitude used throughout the bundled scenarios.
Exosystem harmonic_exo() {
  const double w = 2.0 * std::acos(-1.0) / 21600.0;
  return gasreg::make_exosystem(Mat{{0.0, 1.0}, {-w * w, 0.0}}, {1.0, 0.0},
                                {0.0, 0.1 * 289.0 / 3600.0});
}

}  // namespace

TEST_CASE("exosystem construction validates shapes") {
  CHECK_THROWS_AS(gasreg::make_exosystem(Mat(2, 3), {1.0, 0.0}, {0.0, 0.0}), gasreg::invalid_input);
  CHECK_THROWS_AS(gasreg::make_exosystem(Mat(2, 2), {1.0}, {0.0, 0.0}), gasreg::invalid_input);
  CHECK_THROWS_AS(gasreg::make_exosystem(Mat(2, 2), {1.0, 0.0}, {0.0}), gasreg::invalid_input);
}

TEST_CASE("harmonic generator output matches the closed-form sinusoid") {
  const auto exo = harmonic_exo();
  const double w = 2.0 * std::acos(-1.0) / 21600.0;
  const double amp = exo.x0[1] / w;  // 27.597467132134653
  CHECK(amp == Catch::Approx(27.597467132134653).epsilon(1e-13));
  for (double t : {0.0, 97.0, 5400.0, 9999.5, 21600.0, 40000.0}) {
    const auto x = gasreg::step_exo(exo, exo.x0, t);
    CHECK(gasreg::s_of(exo, x) == Catch::Approx(amp * std::sin(w * t)).margin(1e-9 * amp));
  }
}

TEST_CASE("exact flow satisfies the semigroup property") {
  const auto exo = harmonic_exo();
  std::mt19937 rng(77u);
  std::uniform_real_distribution<double> dist(1.0, 4e4);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = dist(rng);
    const double b = dist(rng);
    const auto two_steps = gasreg::step_exo(exo, gasreg::step_exo(exo, exo.x0, a), b);
    const auto one_step = gasreg::step_exo(exo, exo.x0, a + b);
    for (int i = 0; i < 2; ++i)
      CHECK(two_steps[static_cast<std::size_t>(i)] ==
            Catch::Approx(one_step[static_cast<std::size_t>(i)]).margin(1e-10 * 28.0));
  }
}

TEST_CASE("uncertainty kinds") {
  SECTION("none is identically zero") {
    const gasreg::Uncertainty u;
    CHECK(gasreg::epsilon_of(u, 123.0, 45.0) == 0.0);
  }
  SECTION("cubic of the predictable disturbance") {
    gasreg::Uncertainty u;
    u.kind = gasreg::UncertaintyKind::CubicOfS;
    u.bound = 25.0;
    const double s_peak = 27.597467132134653;
    CHECK(gasreg::epsilon_of(u, 0.0, s_peak) == Catch::Approx(21.018788218905153).epsilon(1e-12));
    u.cubic_coeff = 2e-3;
    CHECK(gasreg::epsilon_of(u, 0.0, 3.0) == Catch::Approx(0.054).epsilon(1e-12));
  }
  SECTION("sampled series interpolates, holds ends, and clamps") {
    gasreg::Uncertainty u;
    u.kind = gasreg::UncertaintyKind::Samples;
    u.bound = 5.0;
    u.series = {{0.0, 0.0}, {10.0, 4.0}, {20.0, -8.0}};
    gasreg::validate_uncertainty(u);
    CHECK(gasreg::epsilon_of(u, -3.0, 0.0) == 0.0);
    CHECK(gasreg::epsilon_of(u, 5.0, 0.0) == Catch::Approx(2.0));
    CHECK(gasreg::epsilon_of(u, 15.0, 0.0) == Catch::Approx(-2.0));
    CHECK(gasreg::epsilon_of(u, 19.0, 0.0) == -5.0);  // clamped to the bound
    CHECK(gasreg::epsilon_of(u, 99.0, 0.0) == -5.0);  // held past the last knot
  }
  SECTION("validation rejects bad series") {
    gasreg::Uncertainty u;
    u.kind = gasreg::UncertaintyKind::Samples;
    CHECK_THROWS_AS(gasreg::validate_uncertainty(u), gasreg::invalid_input);
    u.series = {{1.0, 0.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(gasreg::validate_uncertainty(u), gasreg::invalid_input);
    u.series = {{0.0, 0.0}};
    u.bound = -1.0;
    CHECK_THROWS_AS(gasreg::validate_uncertainty(u), gasreg::invalid_input);
  }
}

TEST_CASE("injection gain placement on a hand-solved double integrator") {
  const auto exo = gasreg::make_exosystem(Mat{{0.0, 1.0}, {0.0, 0.0}}, {1.0, 0.0}, {0.0, 0.0});
  const auto h = gasreg::place_injection_gain(exo, 1.0, {cplx(-1.0, 0.0), cplx(-2.0, 0.0)});
  REQUIRE(h.size() == 2);
  CHECK(h[0] == Catch::Approx(-3.0).margin(1e-12));
  CHECK(h[1] == Catch::Approx(-2.0).margin(1e-12));
  CHECK(gasreg::hurwitz_margin(exo, 1.0, h) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("injection gain placement on the harmonic generator") {
  const auto exo = harmonic_exo();
  const double sigma = 378.0;
  const auto poles = gasreg::default_observer_poles(exo);
  const double w = 2.0 * std::acos(-1.0) / 21600.0;
  REQUIRE(poles.size() == 2);
  CHECK(poles[0].real() == Catch::Approx(-3.0 * w).epsilon(1e-12));
  CHECK(poles[1].real() == Catch::Approx(-4.0 * w).epsilon(1e-12));

  const auto h = gasreg::place_injection_gain(exo, sigma, poles);
  CHECK(h[0] == Catch::Approx(-0.7696902001294994).epsilon(1e-9));
  CHECK(h[1] == Catch::Approx(-3.5183311985364835e-4).epsilon(1e-9));

  // Placed spectrum lands where requested.
  gasreg::lin::Mat m = exo.a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) += h[static_cast<std::size_t>(i)] * exo.c[static_cast<std::size_t>(j)] / sigma;
  auto ev = gasreg::lin::eigenvalues(m);
  std::sort(ev.begin(), ev.end(), [](const cplx& a, const cplx& b) { return a.real() < b.real(); });
  CHECK(std::abs(ev[0] - cplx(-4.0 * w, 0.0)) <= 1e-6 * w);
  CHECK(std::abs(ev[1] - cplx(-3.0 * w, 0.0)) <= 1e-6 * w);
  CHECK(gasreg::hurwitz_margin(exo, sigma, h) == Catch::Approx(3.0 * w).epsilon(1e-6));
}

TEST_CASE("injection gain placement rejects bad inputs") {
  const auto exo = harmonic_exo();
  SECTION("wrong pole count") {
    CHECK_THROWS_AS(gasreg::place_injection_gain(exo, 378.0, {cplx(-1.0, 0.0)}), gasreg::invalid_input);
  }
  SECTION("unstable pole") {
    CHECK_THROWS_AS(gasreg::place_injection_gain(exo, 378.0, {cplx(-1.0, 0.0), cplx(0.5, 0.0)}),
                    gasreg::invalid_input);
  }
  SECTION("complex poles must pair up") {
    CHECK_THROWS_AS(gasreg::place_injection_gain(exo, 378.0, {cplx(-1.0, 1.0), cplx(-1.0, 2.0)}),
                    gasreg::invalid_input);
    const auto h = gasreg::place_injection_gain(exo, 378.0, {cplx(-1.0, 1.0), cplx(-1.0, -1.0)});
    CHECK(gasreg::hurwitz_margin(exo, 378.0, h) == Catch::Approx(1.0).epsilon(1e-6));
  }
  SECTION("unobservable pair") {
    const auto bad = gasreg::make_exosystem(Mat{{0.0, 1.0}, {0.0, 0.0}}, {0.0, 1.0}, {0.0, 0.0});
    CHECK_THROWS_AS(gasreg::place_injection_gain(bad, 1.0, {cplx(-1.0, 0.0), cplx(-2.0, 0.0)}),
                    gasreg::unobservable_pair);
  }
  SECTION("zero generator has no default pole scale") {
    const auto zero = gasreg::make_exosystem(Mat(2, 2), {1.0, 0.0}, {0.0, 0.0});
    CHECK_THROWS_AS(gasreg::default_observer_poles(zero), gasreg::invalid_input);
  }
}
