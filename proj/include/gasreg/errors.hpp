#pragma once

#include <stdexcept>
#include <string>

namespace gasreg {

// Base class for everything this library throws on purpose.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument violated a documented precondition (bad size, value out of
// range, position outside the pipe, malformed pole set, ...).
class invalid_input : public error {
 public:
  using error::error;
};

// The requested steady state does not exist: the inlet density setpoint is
// too low to push the nominal flux through the whole line.
class infeasible_equilibrium : public error {
 public:
  using error::error;
};

// The (A, c) generator pair admits no output injection design.
class unobservable_pair : public error {
 public:
  using error::error;
};

// Scenario files: missing/unknown/bad fields or JSON syntax problems.
// Messages name the offending field or the line of the syntax error.
class scenario_error : public error {
 public:
  using error::error;
};

// A time step that breaks the advective stability limit.
class cfl_violation : public error {
 public:
  using error::error;
};

// Something went numerically wrong at run time.
class numeric_failure : public error {
 public:
  using error::error;
};

// A fixed-point or iterative solve ran out of its sweep budget.
class solver_divergence : public numeric_failure {
 public:
  using numeric_failure::numeric_failure;
};

// Simulation state left the physical regime (non-finite values or
// nonpositive density).
class state_blowup : public numeric_failure {
 public:
  using numeric_failure::numeric_failure;
};

}  // namespace gasreg
