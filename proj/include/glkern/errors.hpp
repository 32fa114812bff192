#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glkern {

/// Precondition violated by a caller-supplied argument.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The known design density vanishes at a point that carries kernel weight.
struct DegenerateDensity : std::runtime_error {
  explicit DegenerateDensity(std::size_t index)
      : std::runtime_error("design density is zero at sample index " +
                           std::to_string(index) +
                           " which has nonzero kernel weight"),
        index(index) {}
  std::size_t index;
};

/// The theoretical bandwidth family is empty at this sample size.
struct EmptyGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No design point falls in the local window used for plug-in constants.
struct NoLocalData : std::runtime_error {
  explicit NoLocalData(double x)
      : std::runtime_error("no design points in the local window around x = " +
                           std::to_string(x)),
        x(x) {}
  double x;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No holdout design point falls inside the calibration interval.
struct EmptyHoldout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fewer than two holdout points; the boundary weights are undefined.
struct InsufficientHoldout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path(path) {}
  std::string path;
};

}  // namespace glkern
