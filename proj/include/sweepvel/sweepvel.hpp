#ifndef SWEEPVEL_SWEEPVEL_HPP
#define SWEEPVEL_SWEEPVEL_HPP

// Umbrella header for the sweeping-process-with-velocity-constraint solver
// and its theorem-checking harness.

#include "sweepvel/analysis.hpp"
#include "sweepvel/convex_sets.hpp"
#include "sweepvel/core.hpp"
#include "sweepvel/integrate.hpp"
#include "sweepvel/io.hpp"
#include "sweepvel/moving_sets.hpp"
#include "sweepvel/operators.hpp"
#include "sweepvel/time_function.hpp"
#include "sweepvel/vi.hpp"

#endif  // SWEEPVEL_SWEEPVEL_HPP
