#pragma once

#include <stdexcept>
#include <string>

namespace entdist {

// Bad user-supplied input: malformed spectra, dimension mismatches, invalid
// basis files. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// An internal invariant failed numerically (e.g. a certificate that should be
// Hermitian is not). Signals a bug or an eigensolver breakdown; exit code 1.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace entdist
