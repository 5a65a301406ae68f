#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace protosel {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
  using Error::Error;
};

class InvalidState : public Error {
public:
  using Error::Error;
};

// Raised when an editing procedure deletes every point.
class EmptyResult : public Error {
public:
  using Error::Error;
};

// Raised when an exhaustive search space exceeds its configured cap.
class CapacityError : public Error {
public:
  CapacityError(const std::string& what, double required, double cap)
      : Error(what + ": search space of " + format(required) + " exceeds cap " + format(cap)),
        required_(required),
        cap_(cap) {}

  double required() const noexcept { return required_; }
  double cap() const noexcept { return cap_; }

private:
  static std::string format(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }

  double required_;
  double cap_;
};

class Infeasible : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

// Input file problems; line is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + msg),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace protosel
