#pragma once

#include <stdexcept>
#include <string>

namespace sbl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (negative variance, non-positive
// precision, mismatched lengths, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A product or query over messages that carry no information at all.
class NoInformation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbl
