#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace snum {

/// Raised when an input violates a documented invariant. `field()` names the
/// offending parameter so callers can report it verbatim.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The requested computation has no formula or lemma for this parameter pair.
class NotApplicable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The embedding is not compact, so its widths do not tend to zero.
class NotCompactError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A rate check could not be carried out for the requested parameters.
class VerificationRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sequence-space model could not be truncated to the requested accuracy.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace snum
