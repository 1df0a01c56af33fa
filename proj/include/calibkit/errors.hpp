#pragma once

#include <stdexcept>
#include <string>

namespace calibkit {

// Base class for every error this library reports.
struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RejectedVector : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct DimensionMismatch : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct LabelOutOfRange : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct InvalidBinCount : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct UnsupportedDimension : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct EmptyInput : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct EmptyDataset : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct OutOfRegion : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct QuadratureFailure : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct NonFiniteInput : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct NonInvertibleModel : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct DomainError : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct ParseError : CalibrationError {
    using CalibrationError::CalibrationError;
};

struct InconsistentWidth : CalibrationError {
    using CalibrationError::CalibrationError;
};

}  // namespace calibkit
