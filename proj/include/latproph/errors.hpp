#pragma once

#include <stdexcept>
#include <string>

namespace latproph {

// Base class for every error raised by the toolkit. The CLI maps these to
// exit code 1 (user-facing) while anything else escaping main is exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// model graph parsing / validation
class SyntaxError : public Error {
 public:
  using Error::Error;
};
class ValidationError : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};

// feature extraction
class OverflowError : public Error {
 public:
  using Error::Error;
};
class UnknownFeatureError : public Error {
 public:
  using Error::Error;
};

// dataset / IO
class IoError : public Error {
 public:
  using Error::Error;
};
class SchemaError : public Error {
 public:
  using Error::Error;
};
class InvariantError : public Error {
 public:
  using Error::Error;
};
class InsufficientDiversityError : public Error {
 public:
  using Error::Error;
};
class EmptyTrainError : public Error {
 public:
  using Error::Error;
};

// regression models
class RankDeficientError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class DegenerateError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class DivergenceError : public Error {
 public:
  using Error::Error;
};
class EarlyStopWithoutValidError : public Error {
 public:
  using Error::Error;
};

// tuning / evaluation
class AllConfigsFailedError : public Error {
 public:
  using Error::Error;
};
class NonPositiveTargetError : public Error {
 public:
  using Error::Error;
};
class EmptySpaceError : public Error {
 public:
  using Error::Error;
};

// predictor container
class VersionError : public Error {
 public:
  using Error::Error;
};
class ChecksumError : public Error {
 public:
  using Error::Error;
};

// synthetic generation
class GenerationRetryExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace latproph
