#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radmark {

enum class ErrorKind {
    configuration,
    contract,
    ingestion,
    validation,
    backend,
    service,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

// Bad configuration or operator-supplied parameters.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& m) : Error(ErrorKind::configuration, m) {}
};

// A caller broke an API precondition (frame mismatch, dimension mismatch...).
class ContractViolation : public Error {
  public:
    explicit ContractViolation(const std::string& m) : Error(ErrorKind::contract, m) {}
};

class IngestionError : public Error {
  public:
    explicit IngestionError(const std::string& m) : Error(ErrorKind::ingestion, m) {}
};

class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& m) : Error(ErrorKind::validation, m) {}
};

class BackendError : public Error {
  public:
    explicit BackendError(const std::string& m) : Error(ErrorKind::backend, m) {}
};

class ServiceError : public Error {
  public:
    explicit ServiceError(const std::string& m) : Error(ErrorKind::service, m) {}
};

} // namespace radmark
