#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace oraclesim {

// Argument outside the mathematical domain of a formula.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A protocol precondition was broken by the caller (e.g. acting on a
// blacklisted node, verifying a report against the wrong test case).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InsufficientPool : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DraftingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration rejected; carries one message per offending field.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration";
    for (const auto& item : items) {
      out += "\n  ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace oraclesim
