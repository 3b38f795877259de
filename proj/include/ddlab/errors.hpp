#pragma once

#include <stdexcept>
#include <string>

namespace ddlab {

// Invalid user-supplied configuration: bad distribution, strategy parameters,
// grids, file contents.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exhaustive path enumeration would exceed the configured cap.
struct EnumerationLimitError : std::runtime_error {
  explicit EnumerationLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

// A state or argument broke a guarantee the caller was supposed to maintain,
// e.g. an account drawdown above its configured cap by more than fp noise.
struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

// An investment outside the survival bounds drove the account value negative.
struct BankruptcyError : std::runtime_error {
  explicit BankruptcyError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical cross-check failed: a closed form disagreed with its oracle or
// a quantity left its proven range.
struct VerificationError : std::runtime_error {
  explicit VerificationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ddlab
