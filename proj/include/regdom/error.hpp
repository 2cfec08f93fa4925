#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace regdom {

enum class ErrorKind {
  validation,    // malformed input or violated invariant
  numeric,       // ill-conditioned or failed computation
  not_in_domain  // query point outside the regular domain
};

/// Base exception for the library. `items` carries itemized detail (ids,
/// residuals) suitable for a machine-readable report.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::vector<std::string> items = {})
      : std::runtime_error(what), kind_(kind), items_(std::move(items)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> items_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::vector<std::string> items = {})
      : Error(ErrorKind::validation, what, std::move(items)) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, std::vector<std::string> items = {})
      : Error(ErrorKind::numeric, what, std::move(items)) {}
};

class NotInDomainError : public Error {
 public:
  explicit NotInDomainError(const std::string& what) : Error(ErrorKind::not_in_domain, what) {}
};

}  // namespace regdom
