#pragma once

#include <stdexcept>
#include <string>

namespace ridepool {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file or table rejected while loading (bad row, unknown node, ...).
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Scenario or game configuration is invalid. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

/// An offer was booked after the operator state it was built from changed.
class StaleOfferError : public Error {
 public:
  using Error::Error;
};

/// The assignment ILP has no solution covering every already-assigned request.
class InfeasibleAssignmentError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ridepool
