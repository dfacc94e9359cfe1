#pragma once

#include <stdexcept>
#include <string>

namespace synthdebias {

// Process exit codes map one-to-one onto these categories.
enum class ErrorCategory : int {
  kIo = 1,
  kValidation = 2,
  kDomain = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::kValidation, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCategory::kDomain, what) {}
};

// Rejection sampling ran out of draws before collecting enough matching rows.
class ConditionTooRare : public DomainError {
 public:
  ConditionTooRare(std::string condition, std::size_t draws, std::size_t found)
      : DomainError("condition too rare: " + condition + " (" +
                    std::to_string(found) + " matches in " +
                    std::to_string(draws) + " draws)"),
        condition_(std::move(condition)) {}

  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

class EmptyArm : public DomainError {
 public:
  explicit EmptyArm(const std::string& what) : DomainError(what) {}
};

class DegenerateExposure : public DomainError {
 public:
  explicit DegenerateExposure(const std::string& what) : DomainError(what) {}
};

class StratumUnestimable : public DomainError {
 public:
  explicit StratumUnestimable(const std::string& what) : DomainError(what) {}
};

}  // namespace synthdebias
