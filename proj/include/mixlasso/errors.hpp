#pragma once

#include <stdexcept>
#include <string>

namespace mixlasso {

// Exit-code mapping: ValidationError -> 2, NumericalError -> 3, IoError -> 4.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mixlasso
