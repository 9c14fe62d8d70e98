#pragma once

#include <stdexcept>
#include <string>

namespace totnet {

enum class ErrorKind {
  Config,
  Validation,
  Annotation,
  Ingest,
  Contract,
  Io,
  Checkpoint,
  Training,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed configuration document; the message names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(ErrorKind::Config, "config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class AnnotationError : public Error {
 public:
  AnnotationError(int frame_index, const std::string& what)
      : Error(ErrorKind::Annotation, "frame " + std::to_string(frame_index) + ": " + what),
        frame_index_(frame_index) {}
  int frame_index() const noexcept { return frame_index_; }

 private:
  int frame_index_;
};

class IngestError : public Error {
 public:
  explicit IngestError(const std::string& what) : Error(ErrorKind::Ingest, what) {}
};

/// A caller broke a documented precondition (shape, range, length).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(ErrorKind::Contract, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class CheckpointError : public Error {
 public:
  CheckpointError(const std::string& section, const std::string& what)
      : Error(ErrorKind::Checkpoint, "checkpoint section '" + section + "': " + what),
        section_(section) {}
  const std::string& section() const noexcept { return section_; }

 private:
  std::string section_;
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what) : Error(ErrorKind::Training, what) {}
};

#define TOTNET_EXPECT(cond, msg)                                      \
  do {                                                                \
    if (!(cond)) throw ::totnet::ContractViolation(std::string(msg)); \
  } while (0)

}  // namespace totnet
