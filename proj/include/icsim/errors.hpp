#pragma once

#include <stdexcept>
#include <string>

namespace icsim {

// Base class for all simulator errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Secular frequency radicand non-positive: no stable harmonic motion.
class UnstableTrap : public Error {
  public:
    using Error::Error;
};

// Mathieu parameters outside the first stability region.
class UnstableParameters : public Error {
  public:
    using Error::Error;
};

// Two ions at identical coordinates; Coulomb terms diverge.
class CoincidentIons : public Error {
  public:
    using Error::Error;
};

// Iterative solver exhausted its budget.
class NotConverged : public Error {
  public:
    using Error::Error;
};

// An operation required a converged configuration.
class UnconvergedInput : public Error {
  public:
    using Error::Error;
};

// Phase classification constant over the whole search interval.
class NoTransitionFound : public Error {
  public:
    using Error::Error;
};

// Raman detuning inside the guard band of a mode frequency.
class ResonantDetuning : public Error {
  public:
    using Error::Error;
};

// Sideband ratio outside [0, 1).
class InvalidRatio : public Error {
  public:
    using Error::Error;
};

// Temperature window shorter than one rf period.
class WindowTooShort : public Error {
  public:
    using Error::Error;
};

// A molecular-dynamics step moved an ion too far to be trusted.
class StepTooLarge : public Error {
  public:
    using Error::Error;
};

// Nonlinear least-squares fit failed to converge.
class FitDiverged : public Error {
  public:
    using Error::Error;
};

// Malformed configuration file.
class ConfigParseError : public Error {
  public:
    using Error::Error;
};

// Structurally valid configuration with inadmissible values.
class ValidationError : public Error {
  public:
    using Error::Error;
};

} // namespace icsim
