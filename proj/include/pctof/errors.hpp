#pragma once

#include <stdexcept>
#include <string>

namespace pctof {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// An argument lies outside the documented domain of an operation.
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A signal configuration violates a model validity bound (e.g. the
/// narrow-pulse requirement 6*sigma < 2*pi).
struct ModelValidityError : Error {
  explicit ModelValidityError(const std::string& msg) : Error(msg) {}
};

/// An operation was asked to run on a coding kind it does not support.
struct UnsupportedCodingError : Error {
  explicit UnsupportedCodingError(const std::string& msg) : Error(msg) {}
};

/// A four-tap operation received a frame with a different tap count.
struct UnsupportedTapCountError : Error {
  explicit UnsupportedTapCountError(const std::string& msg) : Error(msg) {}
};

/// Numerical integration failed to reach the requested tolerance within
/// its refinement budget.
struct IntegrationError : Error {
  explicit IntegrationError(const std::string& msg) : Error(msg) {}
};

/// A curve fit could not be completed (e.g. monotonicity unreachable).
struct FitError : Error {
  explicit FitError(const std::string& msg) : Error(msg) {}
};

/// A response or edge is degenerate: constant samples, NaNs, or a
/// reversed/empty interval.
struct DegenerateEdgeError : Error {
  explicit DegenerateEdgeError(const std::string& msg) : Error(msg) {}
};

/// A requested value lies outside the calibrated sensitive range.
struct OutOfSensitiveRangeError : Error {
  explicit OutOfSensitiveRangeError(const std::string& msg) : Error(msg) {}
};

/// A calibration sweep contains no usable rising edge.
struct DegenerateSweepError : Error {
  explicit DegenerateSweepError(const std::string& msg) : Error(msg) {}
};

/// Calibration produced too many invalid pixels to be usable.
struct CalibrationError : Error {
  explicit CalibrationError(const std::string& msg) : Error(msg) {}
};

/// A calibration table and an acquisition configuration do not match.
struct CompatibilityError : Error {
  explicit CompatibilityError(const std::string& msg) : Error(msg) {}
};

/// A metric was evaluated over an empty set of valid pixels.
struct EmptyMetricError : Error {
  explicit EmptyMetricError(const std::string& msg) : Error(msg) {}
};

/// A file could not be opened, read, or written.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// A file exists but its contents do not parse; the message carries
/// position diagnostics (line/column or byte offset).
struct FormatError : Error {
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

/// A run configuration (CLI config file or flags) is invalid.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace pctof
