#pragma once

#include <stdexcept>
#include <string>

namespace mcid {

// Shapes or indices that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A call that violates an operation's preconditions (empty inputs, out of range
// arguments, misuse of the autograd tape).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent on-disk data. The message names the offending field.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace mcid
