#pragma once

#include <stdexcept>

namespace foveate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Connection-level failure (refused, timeout, 5xx, 429). Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

// 401/403 from the backend. Never retried.
class AuthError : public Error {
 public:
  using Error::Error;
};

// Transport succeeded but the payload is unusable (missing text, bad JSON,
// wrong cardinality). Never retried.
class BadResponseError : public Error {
 public:
  using Error::Error;
};

// Model output that stayed unparseable after the re-prompt budget.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace foveate
