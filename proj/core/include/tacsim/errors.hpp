#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tacsim {

// Base of every exception thrown by the library. The CLI maps the concrete
// categories below onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad user input: configuration, schema, arguments, missing files.
class InputError : public Error {
public:
  using Error::Error;
};

// Two data sets that should correspond do not.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

// Failure while the simulation or imaging pipeline is running.
class RuntimeFailure : public Error {
public:
  using Error::Error;
};

class ArgumentError : public InputError {
public:
  using InputError::InputError;
};

class ParseError : public InputError {
public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : InputError(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class SchemaError : public InputError {
public:
  SchemaError(std::string field, const std::string& what)
      : InputError("field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class MissingFileError : public InputError {
public:
  explicit MissingFileError(std::string path)
      : InputError("file not found: " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

class LayoutResolutionError : public InputError {
public:
  using InputError::InputError;
};

class PairingError : public ConsistencyError {
public:
  using ConsistencyError::ConsistencyError;
};

class OutOfDomainError : public RuntimeFailure {
public:
  OutOfDomainError(std::size_t particle, const std::string& what)
      : RuntimeFailure("particle " + std::to_string(particle) + " out of grid domain: " + what),
        particle_(particle) {}
  std::size_t particle() const noexcept { return particle_; }

private:
  std::size_t particle_;
};

class InvertedElementError : public RuntimeFailure {
public:
  InvertedElementError(std::size_t particle, double det)
      : RuntimeFailure("particle " + std::to_string(particle) +
                       " inverted (det F = " + std::to_string(det) + ")"),
        particle_(particle) {}
  std::size_t particle() const noexcept { return particle_; }

private:
  std::size_t particle_;
};

class CflError : public RuntimeFailure {
public:
  using RuntimeFailure::RuntimeFailure;
};

// Wraps an engine failure with the step at which it happened.
class StepError : public RuntimeFailure {
public:
  StepError(std::int64_t step, const std::string& what)
      : RuntimeFailure("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::int64_t step() const noexcept { return step_; }

private:
  std::int64_t step_;
};

class BehindCameraError : public RuntimeFailure {
public:
  using RuntimeFailure::RuntimeFailure;
};

class InsufficientPointsError : public RuntimeFailure {
public:
  using RuntimeFailure::RuntimeFailure;
};

class DegenerateFitError : public RuntimeFailure {
public:
  using RuntimeFailure::RuntimeFailure;
};

class EmptyFrameError : public RuntimeFailure {
public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace tacsim
