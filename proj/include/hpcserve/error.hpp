#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hpcserve {

// Every failure the library reports. Each kind maps to exactly one CLI exit
// code via exit_code().
enum class ErrorKind {
  parse,
  validation,
  unknown_model,
  image_missing,
  missing_cert,
  infeasible_plan,
  multi_node_unsupported,
  single_node_plan,
  unsupported_scheduler,
  invalid_range,
  unparseable_output,
  empty_series,
  no_common_points,
  binary_not_found,
  non_zero_exit,
  target_unavailable,
  timeout,
};

std::string_view kind_name(ErrorKind kind);
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line)
      : Error(ErrorKind::parse, message), line_(line) {}
  /// 1-based line, or 0 when unknown.
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(ErrorKind::validation, field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class TimeoutError : public Error {
 public:
  TimeoutError(const std::string& message, std::chrono::duration<double> elapsed)
      : Error(ErrorKind::timeout, message), elapsed_(elapsed) {}
  std::chrono::duration<double> elapsed() const noexcept { return elapsed_; }

 private:
  std::chrono::duration<double> elapsed_;
};

class NonZeroExitError : public Error {
 public:
  NonZeroExitError(const std::string& message, int code)
      : Error(ErrorKind::non_zero_exit, message), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

}  // namespace hpcserve
