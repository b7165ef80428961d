#pragma once

#include <stdexcept>
#include <string>

namespace eplab {

// Rejected input: out-of-range parameters, malformed scenarios, inadmissible
// data. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation that could not produce a verdict (root not bracketed,
// integrator gave up before the quantity of interest was reached). The CLI
// maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eplab
