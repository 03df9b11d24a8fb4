#pragma once

#include <stdexcept>
#include <string>

namespace swapjudge {

// Caller passed arguments outside an operation's domain (empty input, bad weights).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A structural precondition between values was broken (unequal vectors, short transcripts).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid template, config file or CLI option combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A judge backend could not produce a call (transport failure after retries).
class JudgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset, transcript log or model document could not be read.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swapjudge
