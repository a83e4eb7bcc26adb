#pragma once

#include <stdexcept>
#include <string>

namespace phasekit {

/// Operand shapes do not agree (vector length vs. matrix columns, image
/// width x height vs. signal length, ...).
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A binary file (IDX, weight file, sensing fixture) is malformed.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace phasekit
