#pragma once

#include <stdexcept>
#include <string>

namespace agentgit {

// Base class for all domain errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Referenced checkpoint, branch or store entity does not exist.
struct NotFoundError : Error {
  using Error::Error;
};

// Lost the compare-and-swap on a branch head; the caller may retry.
struct ConflictError : Error {
  using Error::Error;
};

// Stored object bytes no longer match their content address.
struct CorruptObjectError : Error {
  using Error::Error;
};

// Document cannot be canonically serialized (non-finite number,
// invalid UTF-8); the message names the offending key-path.
struct SerializationError : Error {
  using Error::Error;
};

// Malformed input: bad names, out-of-range values, unparsable files.
struct ValidationError : Error {
  using Error::Error;
};

struct ExecutorError : Error {
  using Error::Error;
};

// Replay-mode fixture lookup failed.
struct FixtureMissError : ExecutorError {
  using ExecutorError::ExecutorError;
};

// Transient transport failure (connect, timeout); retryable.
struct TransportError : ExecutorError {
  using ExecutorError::ExecutorError;
};

}  // namespace agentgit
