#pragma once

#include <stdexcept>
#include <string>

namespace mtoc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor dimensions do not conform for the requested operation.
struct ShapeError : Error {
    using Error::Error;
};

/// Invalid configuration value (rates, sizes, widths, presets).
struct ConfigError : Error {
    using Error::Error;
};

/// Malformed input file (bad magic, truncated payload, bad record size).
struct FormatError : Error {
    using Error::Error;
};

/// A value is outside its documented domain (labels, pixel bytes).
struct ValueError : Error {
    using Error::Error;
};

/// An operation was called in the wrong state (backward before forward,
/// mismatched channel realization, empty dataset).
struct StateError : Error {
    using Error::Error;
};

/// Filesystem failure.
struct IoError : Error {
    using Error::Error;
};

/// Training produced a non-finite loss.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace mtoc
