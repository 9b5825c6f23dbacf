#pragma once

#include <stdexcept>
#include <string>

namespace reagent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EmptyContextError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

class MalformedProposalError : public Error {
 public:
  using Error::Error;
};

class StrategyUnavailableError : public Error {
 public:
  using Error::Error;
};

/// A backend answered with something that violates the distribution contract.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Remote call failed. `retryable` mirrors the server's flag (or true for
/// connection-level failures); `attempts` is how many tries were made.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retryable, int attempts, int status = 0)
      : Error(what), retryable_(retryable), attempts_(attempts), status_(status) {}

  bool retryable() const { return retryable_; }
  int attempts() const { return attempts_; }
  int status() const { return status_; }

 private:
  bool retryable_;
  int attempts_;
  int status_;
};

/// The zero-input distance is 0, so Soft-NS/NC are undefined.
class DegenerateBaselineError : public Error {
 public:
  using Error::Error;
};

class OracleScaleError : public Error {
 public:
  using Error::Error;
};

class EmptyReportError : public Error {
 public:
  using Error::Error;
};

}  // namespace reagent
