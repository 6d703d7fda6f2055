#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "btprox/scenario.hpp"

namespace btprox {

/// fig3..fig8 and adaptive-walk, in that order.
std::vector<std::string> builtin_figure_names();

/// Throws ConfigError for an unknown name.
Scenario builtin_figure(std::string_view name);

/// Stepped sweep: holds each distance for `dwell_s`, in feet on input.
Trajectory dwell_sweep_ft(double from_ft, double to_ft, double step_ft, double dwell_s);

}  // namespace btprox
