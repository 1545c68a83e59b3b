#pragma once

#include <stdexcept>
#include <string>

namespace superrad {

// Exception categories map one-to-one onto the CLI exit codes:
// IoError/ParseError -> 1, ValidationError -> 2, NumericalError -> 3.

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace superrad
