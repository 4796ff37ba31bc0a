#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aircomp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sizes or indices that do not agree with the model they are applied to.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible range (negative power, empty set, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient data for a requested decomposition.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// A transceiver design that yields zero received variance.
class DegenerateDesign : public Error {
 public:
  using Error::Error;
};

/// The receive beamformer is orthogonal to a device's effective channel.
class BeamformerNullsDevice : public Error {
 public:
  explicit BeamformerNullsDevice(std::size_t device)
      : Error("beamformer nulls device " + std::to_string(device)),
        device_(device) {}

  std::size_t device() const noexcept { return device_; }

 private:
  std::size_t device_;
};

/// The convex subproblem solver stopped without a usable point.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace aircomp
