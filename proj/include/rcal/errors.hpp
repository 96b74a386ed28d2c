#pragma once

#include <stdexcept>
#include <string>

namespace rcal {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input vector/matrix sizes do not match the operation's contract.
struct DimensionError : Error {
  using Error::Error;
};

// A configuration value is out of its documented range.
struct ParameterError : Error {
  using Error::Error;
};

// A keypoint layout violates its invariants or does not fit the chain.
struct LayoutError : Error {
  using Error::Error;
};

// A heatmap carries no decodable peak.
struct DecodeError : Error {
  using Error::Error;
};

// Point has non-positive depth in the camera frame.
struct BehindCameraError : Error {
  using Error::Error;
};

// Fewer than the minimum usable 2D-3D correspondences.
struct InsufficientCorrespondencesError : Error {
  using Error::Error;
};

// 3D points are collinear (or otherwise unusable) for pose estimation.
struct DegenerateConfigurationError : Error {
  using Error::Error;
};

// Training set misses a class or training blew up.
struct TrainingError : Error {
  using Error::Error;
};

// Scenario generation could not satisfy the requested visibility pattern.
struct GenerationError : Error {
  using Error::Error;
};

// Malformed input file or config; maps to CLI exit code 2.
struct ParseError : Error {
  using Error::Error;
};

// Corrupt or inconsistent data encountered at runtime; maps to CLI exit code 3.
struct DataError : Error {
  using Error::Error;
};

}  // namespace rcal
