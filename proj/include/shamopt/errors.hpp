#pragma once

#include <stdexcept>
#include <string>

namespace shamopt {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace shamopt
