#pragma once

#include <stdexcept>
#include <string>

namespace m4bram {

/// Base for every error raised by the library. Each subclass names the
/// contract that was violated so callers can dispatch on the failure kind.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unsupported weight/activation precision or operand width.
class PrecisionError : public Error {
public:
  using Error::Error;
};

/// Bit-vector width or array geometry does not match the block variant.
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Operand value not representable at the configured width.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Instruction field overflow or reserved bit pattern.
class EncodingError : public Error {
public:
  using Error::Error;
};

/// Illegal instruction sequence (e.g. mismatched pair).
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// Operation requested in the wrong controller state.
class StateError : public Error {
public:
  using Error::Error;
};

/// Invalid accelerator or experiment configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// No configuration fits the resource budget.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

/// Architecture profile cannot be instantiated for the request.
class UnsupportedProfileError : public Error {
public:
  using Error::Error;
};

/// Malformed input file; message carries line/field diagnostics.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Well-formed input whose values violate an invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

} // namespace m4bram
