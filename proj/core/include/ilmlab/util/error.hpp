#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ilmlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or width mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Label or element id outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Empty or otherwise unusable input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage needs a file an earlier stage has not produced.
class MissingArtifactError : public InputError {
 public:
  MissingArtifactError(const std::string& artifact, const std::string& producer)
      : InputError("missing " + artifact + " (produce it with `ilmlab " + producer + "`)"), artifact_(artifact) {}
  const std::string& artifact() const noexcept { return artifact_; }

 private:
  std::string artifact_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on an object in the wrong state or variant.
class UsageError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace ilmlab
