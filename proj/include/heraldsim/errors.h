#pragma once

#include <stdexcept>
#include <string>

namespace heraldsim {

/// Invalid parameters, inconsistent circuits, unmapped modes.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Photon-number truncation exceeded.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Argument outside the domain of a closed-form function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An estimator was asked for a value it cannot define (e.g. zero counts).
class UndefinedEstimate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace heraldsim
