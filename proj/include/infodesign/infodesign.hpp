#pragma once

// Everything: the library, JSON I/O and the command-line driver.

#include "errors.hpp"
#include "linalg.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "simplex_lp.hpp"
#include "concavify.hpp"
#include "geometry.hpp"
#include "functions.hpp"
#include "posset.hpp"
#include "optimize.hpp"
#include "frank_wolfe.hpp"
#include "solver.hpp"
#include "dynamic.hpp"
#include "apps.hpp"
#include "io.hpp"
#include "cli.hpp"
