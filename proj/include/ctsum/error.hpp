#pragma once

#include <stdexcept>
#include <string>

namespace ctsum {

// Base of every error raised by the library. Input problems (bad files,
// malformed manifests, inconsistent shapes) derive from InputError so the CLI
// can map them to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};
class FormatError : public InputError {
 public:
  using InputError::InputError;
};
class DataError : public InputError {
 public:
  using InputError::InputError;
};
class ManifestError : public InputError {
 public:
  using InputError::InputError;
};
class MissingReferenceError : public InputError {
 public:
  using InputError::InputError;
};
class SpecError : public InputError {
 public:
  using InputError::InputError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};
class DegenerateFeatureError : public Error {
 public:
  using Error::Error;
};
class TooShortError : public Error {
 public:
  using Error::Error;
};
class EmptyBatchError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};
class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctsum
