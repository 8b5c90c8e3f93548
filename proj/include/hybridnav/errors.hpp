#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hybridnav {

/// Raised when a workspace or scenario fails validation; carries the full
/// list of violations so callers can report all of them at once.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "validation failed:";
    for (const auto& item : v) {
      s += "\n  - " + item;
    }
    return s;
  }

  std::vector<std::string> violations_;
};

/// Raised when a derived controller parameter cannot satisfy its
/// constraints (for example a virtual-destination distance too large for
/// the half-space condition).
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hybridnav
