#pragma once

#include <stdexcept>
#include <string>

namespace ctxsense {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error { using Error::Error; };
class TimelineError : public Error { using Error::Error; };
class CoverageError : public Error { using Error::Error; };
class FilterError : public Error { using Error::Error; };
class SpecError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class EmptyAfterCleaningError : public Error { using Error::Error; };
class AssemblyError : public Error { using Error::Error; };
class TaskConstructionError : public Error { using Error::Error; };
class DegenerateError : public Error { using Error::Error; };
class TrainError : public Error { using Error::Error; };
class MetricError : public Error { using Error::Error; };
class ClusterError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace ctxsense
