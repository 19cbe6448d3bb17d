#ifndef STORESENSE_ERROR_HPP
#define STORESENSE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace storesense {

/// Base of every error thrown by the library. `kind()` is a short stable tag
/// used by the CLI for its machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what) : Error("scenario", what) {}
};

class BusError : public Error {
 public:
  explicit BusError(const std::string& what) : Error("bus", what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error("state", what) {}
};

}  // namespace storesense

#endif  // STORESENSE_ERROR_HPP
