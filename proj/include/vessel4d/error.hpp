#pragma once

#include <stdexcept>
#include <string>

namespace vessel4d {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. The message carries file/line context.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Data that parses but violates a domain invariant (tracked ids, ranges).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Parameters outside their documented domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation that would produce nothing (everything filtered, empty ROI).
class EmptyResultError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry that cannot be handled (coincident points, zero-length edge).
class GeometryError : public Error {
 public:
  using Error::Error;
};

class CurationError : public Error {
 public:
  using Error::Error;
};

}  // namespace vessel4d
