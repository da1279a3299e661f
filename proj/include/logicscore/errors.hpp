#pragma once

#include <stdexcept>
#include <string>

namespace logicscore {

// Base class for every error raised by this library. The CLI maps subclasses
// onto exit codes (config -> 2, I/O -> 3, backend -> 4).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// trace parsing
class MalformedTrace : public Error { public: using Error::Error; };
class MissingAnswer : public Error { public: using Error::Error; };
class AlignmentFailure : public Error { public: using Error::Error; };

// embeddings
class ProviderError : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };

// logic / prover
class UnsupportedFormula : public Error { public: using Error::Error; };
class BackendUnavailable : public Error { public: using Error::Error; };

// scoring
class MissingTokenProbs : public Error { public: using Error::Error; };
class EmptyTrace : public Error { public: using Error::Error; };

// configuration and I/O
class ConfigError : public Error { public: using Error::Error; };
class DuplicateKey : public ConfigError { public: using ConfigError::ConfigError; };
class ConfigMismatch : public ConfigError { public: using ConfigError::ConfigError; };
class IoError : public Error { public: using Error::Error; };

// Positioned syntax error for the logic interchange format. Line and column
// are 1-based and refer to the raw input text.
class LifSyntaxError : public Error {
public:
  LifSyntaxError(int line, int col, const std::string& msg)
      : Error("line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + msg),
        line_(line), col_(col), detail_(msg) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& detail() const { return detail_; }

private:
  int line_;
  int col_;
  std::string detail_;
};

// Errors raised by the external-service gateway.
class GatewayError : public Error {
public:
  enum class Kind { Transport, CacheMiss, AuthMissing };

  GatewayError(Kind kind, const std::string& msg, int retries = 0)
      : Error(msg), kind_(kind), retries_(retries) {}

  Kind kind() const { return kind_; }
  int retries() const { return retries_; }

private:
  Kind kind_;
  int retries_;
};

} // namespace logicscore
