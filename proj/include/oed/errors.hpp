#pragma once

#include <stdexcept>
#include <string>

namespace oed {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together (or an index/depth is out of range).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf handed to a numerical routine.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// A structural property (controllability, observability) does not hold.
class StructureError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or violated design precondition (e.g. L <= lag).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The online design could not find a kernel certificate before the horizon.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// The unknown-n design exceeded its step cap without meeting the stop rule.
class RunawayError : public Error {
public:
    using Error::Error;
};

/// Rejection sampling ran out of attempts.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// The exact rank oracle cannot answer (non-integer input or overflow).
class OracleError : public Error {
public:
    using Error::Error;
};

}  // namespace oed
