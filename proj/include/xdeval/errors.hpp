#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xdeval {

// Root of the toolkit error hierarchy.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad inputs: violated preconditions, malformed files, invalid configuration.
// The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
  using Error::Error;
};

class ShapeMismatch : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class EmptySample : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class BadK : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class TooSmall : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Syntactically broken input text. Carries the 1-based line and the byte
// offset of the failure when known (0 when not).
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t offset)
      : ValidationError(what), line_(line), offset_(offset) {}
  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

private:
  std::size_t line_ = 0;
  std::size_t offset_ = 0;
};

// Well-formed input whose cross-references or value ranges are inconsistent.
class IntegrityError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// A binary file that does not follow its declared layout.
class FormatError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// The requested metric has no defined value on the given inputs.
// The CLI maps these to exit code 3.
class UndefinedMetric : public Error {
public:
  using Error::Error;
};

class NotEvaluable : public UndefinedMetric {
public:
  using UndefinedMetric::UndefinedMetric;
};

class NoGroundTruth : public UndefinedMetric {
public:
  using UndefinedMetric::UndefinedMetric;
};

class NoPositiveRelevance : public UndefinedMetric {
public:
  using UndefinedMetric::UndefinedMetric;
};

class NothingToExplain : public UndefinedMetric {
public:
  using UndefinedMetric::UndefinedMetric;
};

// Training produced a non-finite loss.
class Diverged : public Error {
public:
  using Error::Error;
};

}  // namespace xdeval
