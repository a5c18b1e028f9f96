#pragma once

#include <stdexcept>
#include <string>

namespace ttp {

// Base of every error raised by the toolkit. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or value that violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class SchemaError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UndefinedBearing : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class DegenerateTrip : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class ShapeError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class UnmatchableTrip : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// Remote service could not be reached after all retries.
class TransportError : public Error {
 public:
  TransportError(int attempts, const std::string& what)
      : Error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

// Remote service answered, but not with success.
class RemoteRejection : public Error {
 public:
  RemoteRejection(int status, const std::string& what)
      : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace ttp
