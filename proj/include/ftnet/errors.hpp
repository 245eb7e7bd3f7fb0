#pragma once

#include <stdexcept>
#include <string>

namespace ftnet {

// Raised when a caller breaks a documented precondition (dimension mismatch,
// unsupported activation for a construction, invalid hidden size, ...).
class ContractViolation : public std::invalid_argument {
public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when inputs are numerically rank deficient.
class DegenerateInput : public std::runtime_error {
public:
  explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};

class NonFiniteLoss : public std::runtime_error {
public:
  explicit NonFiniteLoss(const std::string& what) : std::runtime_error(what) {}
};

// Malformed model or config files.
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace ftnet
