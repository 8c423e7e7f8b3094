#pragma once

#include "stlplan/ascent.hpp"
#include "stlplan/config.hpp"
#include "stlplan/errors.hpp"
#include "stlplan/file_io.hpp"
#include "stlplan/formula.hpp"
#include "stlplan/geometry.hpp"
#include "stlplan/lse.hpp"
#include "stlplan/mission.hpp"
#include "stlplan/motion_primitives.hpp"
#include "stlplan/planner.hpp"
#include "stlplan/polynomial.hpp"
#include "stlplan/replanner.hpp"
#include "stlplan/robustness.hpp"
#include "stlplan/scenario_io.hpp"
#include "stlplan/trace.hpp"
#include "stlplan/trace_io.hpp"
