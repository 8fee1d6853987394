#pragma once

#include <stdexcept>
#include <string>

namespace tcalc {

// All library failures derive from Error so the CLI can map them to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point outside the chart, or off a hypersurface where a point on it is required.
struct DomainError : Error {
  using Error::Error;
};

// Not enough jet order left to take the requested derivatives.
struct CapabilityError : Error {
  using Error::Error;
};

struct ScaleError : Error {
  using Error::Error;
};

struct WeightError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

struct DegeneracyError : Error {
  using Error::Error;
};

struct ConditioningError : Error {
  using Error::Error;
};

struct ResonanceError : Error {
  using Error::Error;
};

// Radial integration or boundary fit failed to converge.
struct GridError : Error {
  using Error::Error;
};

struct BoundaryError : Error {
  using Error::Error;
};

struct NormalizationError : Error {
  using Error::Error;
};

struct NotAlmostEinsteinError : Error {
  using Error::Error;
};

// Wrong sign of |I|^2 for the requested construction.
struct BranchError : Error {
  using Error::Error;
};

}  // namespace tcalc
