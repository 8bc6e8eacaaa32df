#pragma once

#include <stdexcept>
#include <string>

namespace otpl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied values does not hold.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// geometry
class DegenerateProjection : public Error {
 public:
  using Error::Error;
};
class DegenerateLine : public Error {
 public:
  using Error::Error;
};
class ParallelPlanes : public Error {
 public:
  using Error::Error;
};

// descriptor
class OutOfBounds : public Error {
 public:
  using Error::Error;
};
class DegenerateDescriptor : public Error {
 public:
  using Error::Error;
};

// weighting
class MissingTrack : public Error {
 public:
  using Error::Error;
};

// optimizer
class SingularNormalEquations : public Error {
 public:
  using Error::Error;
};

// evaluation
class InsufficientOverlap : public Error {
 public:
  using Error::Error;
};

// io
class ConfigError : public Error {
 public:
  using Error::Error;
};
class FormatError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace otpl
