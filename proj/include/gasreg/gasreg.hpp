#pragma once

#include "gasreg/errors.hpp"
#include "gasreg/exosystem.hpp"
#include "gasreg/kernels.hpp"
#include "gasreg/linalg.hpp"
#include "gasreg/logging.hpp"
#include "gasreg/pipeline.hpp"
#include "gasreg/runner.hpp"
#include "gasreg/scenario.hpp"
#include "gasreg/scenario_json.hpp"
#include "gasreg/simulate.hpp"
#include "gasreg/svg.hpp"
#include "gasreg/timeseries.hpp"
#include "gasreg/transforms.hpp"
