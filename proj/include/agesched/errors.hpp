#pragma once

#include <stdexcept>
#include <string>

namespace agesched {

/// Invalid user-supplied configuration (CLI maps this to exit status 2).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical procedure failed (singular system, non-finite iterate, ...).
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what)
        : std::runtime_error(what) {}
};

/// A resource budget (e.g. the state-space enumeration cap) was exceeded.
class CapacityError : public std::runtime_error {
  public:
    explicit CapacityError(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace agesched
