#pragma once

#include <string_view>
#include <vector>

#include "sbl/solver.hpp"

namespace sbl::cli {

/// "a:b:step" -> a, a+step, ... up to b inclusive (within step/1e6). A single
/// number is a one-point range. Throws ConfigError on malformed input.
std::vector<double> parse_snr_range(std::string_view text);

/// "5,10,26" -> {5, 10, 26}. Throws ConfigError on malformed input.
std::vector<int> parse_int_list(std::string_view text);

/// "bpmf,mf-scalar" -> algorithms in the given order; "all" -> every one.
std::vector<Algorithm> parse_algorithm_list(std::string_view text);

}  // namespace sbl::cli
