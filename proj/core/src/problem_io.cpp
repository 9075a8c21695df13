#include "sbl/problem_io.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "sbl/errors.hpp"

namespace sbl {

namespace {

void put(std::ostream& out, Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
  out << buf;
}

Complex get(std::istream& in, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("problem file truncated at line " + std::to_string(line_no));
  ++line_no;
  const auto comma = line.find(',');
  if (comma == std::string::npos) {
    throw IoError("expected re,im at line " + std::to_string(line_no));
  }
  try {
    const double re = std::stod(line.substr(0, comma));
    const double im = std::stod(line.substr(comma + 1));
    return {re, im};
  } catch (const std::exception&) {
    throw IoError("malformed number at line " + std::to_string(line_no));
  }
}

}  // namespace

void write_problem(std::ostream& out, const Problem& problem) {
  out << problem.m_rows << ' ' << problem.l_cols << ' ' << problem.k_sparsity << ' '
      << problem.seed << '\n';
  for (int n = 0; n < problem.m_rows; ++n) {
    for (int l = 0; l < problem.l_cols; ++l) put(out, problem.phi(n, l));
  }
  for (int n = 0; n < problem.m_rows; ++n) put(out, problem.y(n));
  for (int l = 0; l < problem.l_cols; ++l) put(out, problem.alpha_true(l));
}

void write_problem(const std::filesystem::path& path, const Problem& problem) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_problem(out, problem);
  if (!out) throw IoError("write failed: " + path.string());
}

Problem read_problem(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty problem file");
  std::istringstream hs(header);
  Problem p;
  if (!(hs >> p.m_rows >> p.l_cols >> p.k_sparsity >> p.seed)) {
    throw IoError("bad header; expected 'M L K seed'");
  }
  if (p.m_rows < 1 || p.l_cols < 1 || p.k_sparsity < 0 || p.k_sparsity > p.l_cols) {
    throw IoError("inconsistent dimensions in header");
  }
  std::size_t line_no = 1;
  p.phi.resize(p.m_rows, p.l_cols);
  for (int n = 0; n < p.m_rows; ++n) {
    for (int l = 0; l < p.l_cols; ++l) p.phi(n, l) = get(in, line_no);
  }
  p.y.resize(p.m_rows);
  for (int n = 0; n < p.m_rows; ++n) p.y(n) = get(in, line_no);
  p.alpha_true.resize(p.l_cols);
  for (int l = 0; l < p.l_cols; ++l) p.alpha_true(l) = get(in, line_no);
  p.lambda_true = std::numeric_limits<double>::quiet_NaN();
  return p;
}

Problem read_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_problem(in);
}

}  // namespace sbl
