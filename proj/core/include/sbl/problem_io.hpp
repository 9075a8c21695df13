#pragma once

#include <filesystem>
#include <iosfwd>

#include "sbl/problem.hpp"

namespace sbl {

// Text dump:
//   M L K seed
//   re,im          one line per element: phi row-major, then y, then alpha_true
// Values are printed with 17 significant digits so a round trip is exact.
// lambda_true is not stored and reads back as NaN.
void write_problem(std::ostream& out, const Problem& problem);
void write_problem(const std::filesystem::path& path, const Problem& problem);

Problem read_problem(std::istream& in);
Problem read_problem(const std::filesystem::path& path);

}  // namespace sbl
