#include "cli_support.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "sbl/errors.hpp"

namespace sbl::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s) {
  s = trim(s);
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw ConfigError("trailing characters in '" + str + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("not a number: '" + std::string(s) + "'");
  }
}

int to_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<double> parse_snr_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() == 1) return {to_double(parts[0])};
  if (parts.size() != 3) throw ConfigError("SNR range must be 'a:b:step'");
  const double first = to_double(parts[0]);
  const double last = to_double(parts[1]);
  const double step = to_double(parts[2]);
  if (!(step > 0.0)) throw ConfigError("SNR step must be positive");
  if (last < first) throw ConfigError("SNR range end is below its start");
  std::vector<double> values;
  const auto count = static_cast<long>(std::floor((last - first) / step + 1e-6)) + 1;
  if (count > 100000) throw ConfigError("SNR range has too many points");
  for (long i = 0; i < count; ++i) values.push_back(first + static_cast<double>(i) * step);
  return values;
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> values;
  for (auto part : split(text, ',')) values.push_back(to_int(part));
  return values;
}

std::vector<Algorithm> parse_algorithm_list(std::string_view text) {
  if (trim(text) == "all") return {std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::vector<Algorithm> algs;
  for (auto part : split(text, ',')) algs.push_back(parse_algorithm(trim(part)));
  return algs;
}

}  // namespace sbl::cli
